#pragma once

namespace leakqkd {

/// Sum of the Poisson(mu) probabilities of n >= from, evaluated without forming 1 - (head sum)
/// whenever the tail is the small part.
double poisson_tail(double mu, int from);

}  // namespace leakqkd
