#include "leakqkd/poisson.hpp"

#include <algorithm>
#include <cmath>

#include "leakqkd/errors.hpp"
#include "leakqkd/leakage.hpp"

namespace leakqkd {

double poisson_tail(double mu, int from) {
    if (!(mu >= 0.0) || !std::isfinite(mu)) {
        throw DomainError("Poisson mean must be finite and non-negative");
    }
    if (from <= 0) return 1.0;
    if (mu == 0.0) return 0.0;

    if (static_cast<double>(from) <= mu) {
        double head = 0.0;
        for (int n = 0; n < from; ++n) head += poisson_pmf(mu, n);
        return std::max(0.0, 1.0 - head);
    }
    // Terms decrease monotonically past the mode, so sum upward until they stop mattering.
    double sum = 0.0;
    for (int n = from;; ++n) {
        const double term = poisson_pmf(mu, n);
        sum += term;
        if (term <= sum * 1e-18 || term == 0.0) break;
    }
    return std::min(1.0, sum);
}

}  // namespace leakqkd
