#pragma once

// Reference constants for the test suite.
//
// Watson-type integrals were computed independently with mpmath at 30
// significant digits through the Laplace representation
//   c(d) = Int_0^inf (e^-t I0(t))^d dt,
// cross-checked for d = 3 against the closed form
//   c(3) = sqrt(6) Gamma(1/24) Gamma(5/24) Gamma(7/24) Gamma(11/24) / (32 pi^3).
// Scaled Bessel values come from scipy.special.i0e.

namespace refs {

inline constexpr double c3 = 0.505462019717326005;
inline constexpr double c4 = 0.309866780462120428;
inline constexpr double c5 = 0.231261624968046236;
inline constexpr double c6 = 0.186160562204445307;
inline constexpr double c10 = 0.105954374788826107;

// c(d,phi) for weights (0.4, 0.7, 1.0), same mpmath route.
inline constexpr double c_w_447_10 = 0.753664761207829363;

// p(nu = 14) at lambda = 1, d = 3 (reduced shift 4): mpmath.
inline constexpr double p14_d3 = 0.281862976225434184;

// b(D)/(2 pi)^5 for m = 5, unit weights: mpmath, t-weighted integrand.
inline constexpr double b5_edge_norm = 0.0773976576152940463;

// scipy.special.i0e
inline constexpr double i0e_half = 6.4503527044914999e-01;
inline constexpr double i0e_1 = 4.6575960759364043e-01;
inline constexpr double i0e_5 = 1.8354081260932834e-01;
inline constexpr double i0e_19_9 = 9.0008588864389588e-02;
inline constexpr double i0e_20 = 8.9780311884826006e-02;
inline constexpr double i0e_20_1 = 8.9553763620613444e-02;
inline constexpr double i0e_25 = 8.0196773547436692e-02;
inline constexpr double i0e_100 = 3.9944379299096680e-02;
inline constexpr double i0e_1000 = 1.2617240455891257e-02;
inline constexpr double i0e_1e6 = 3.9894233026924577e-04;

}  // namespace refs
