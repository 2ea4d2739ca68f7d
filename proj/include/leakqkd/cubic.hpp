#pragma once

#include <array>

namespace leakqkd {

/// Roots of t^3 + p t + q = 0, sorted in descending order, for cubics that arise as
/// characteristic polynomials of operators with a real spectrum.
///
/// Uses the trigonometric form when the discriminant admits three real roots. If
/// rounding pushes the discriminant positive, the complex pair is computed by Cardano's
/// formula and its imaginary part must stay below imag_tol; the real parts are returned.
/// Throws NumericalError otherwise.
std::array<double, 3> depressed_cubic_real_roots(double p, double q, double imag_tol = 1e-8);

}  // namespace leakqkd
