#include "leakqkd/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "leakqkd/errors.hpp"

namespace leakqkd {

std::array<double, 3> depressed_cubic_real_roots(double p, double q, double imag_tol) {
    if (!std::isfinite(p) || !std::isfinite(q)) {
        throw NumericalError("cubic coefficients are not finite");
    }
    if (p == 0.0 && q == 0.0) {
        return {0.0, 0.0, 0.0};
    }

    const double half_q = 0.5 * q;
    const double third_p = p / 3.0;
    const double disc = half_q * half_q + third_p * third_p * third_p;

    std::array<double, 3> roots{};
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-half_q + s);
        const double v = std::cbrt(-half_q - s);
        const double imag = 0.5 * std::sqrt(3.0) * std::abs(u - v);
        if (imag > imag_tol) {
            throw NumericalError("characteristic cubic has complex roots (imaginary part " +
                                 std::to_string(imag) + ")");
        }
        roots = {u + v, -0.5 * (u + v), -0.5 * (u + v)};
    } else {
        // disc <= 0 implies p <= 0.
        const double r = 2.0 * std::sqrt(-third_p);
        double c = (3.0 * q / (2.0 * p)) * std::sqrt(-3.0 / p);
        c = std::clamp(c, -1.0, 1.0);
        const double phi = std::acos(c) / 3.0;
        constexpr double kThird = 2.0 * std::numbers::pi / 3.0;
        roots = {r * std::cos(phi), r * std::cos(phi - kThird), r * std::cos(phi - 2.0 * kThird)};
    }
    std::sort(roots.begin(), roots.end(), std::greater<>());
    return roots;
}

}  // namespace leakqkd
