#pragma once

// Reference computations for the tests. Everything here is deliberately written a
// second way (different basis, different solver, plain summation) and shares no code
// with the library beyond its data types.

#include <complex>
#include <optional>
#include <vector>

#include "leakqkd/lp_solver.hpp"

namespace oracle {

using cd = std::complex<double>;

/// e^{-mu} mu^n / n! by forward recursion in long double.
std::vector<long double> poisson_row(long double mu, int n_max);

/// Trace distance between |a1> and p|a2> + (1-p)|a3> from an explicit 3-dim embedding of
/// the Gram matrix and a Hermitian eigensolve.
double gram_d3(cd a1, cd a2, cd a3, double p);

/// Eigenvalues (descending) of the same embedded operator.
std::vector<double> gram_d3_spectrum(cd a1, cd a2, cd a3, double p);

/// Fidelity between the Z and X PM leak mixtures, in a truncated Fock basis of size dim.
double fock_pm_fidelity(double mu, int dim);

/// 1/2 sum_m |P_j(m) - q P_k(m) - (1-q) P_l(m)| summed until the terms vanish.
double direct_d3_pr(double bj, double bk, double bl, double q);
double direct_d2_pr(double bj, double bk);

/// Dense primal simplex in long double: shift to x >= 0, equilibrate, slacks, phase-1
/// artificials, Bland entering rule, largest-pivot leaving row among near ties, basis refactorised from the original data at
/// every iteration. Returns nullopt when infeasible (or unbounded).
struct SimplexResult {
    double objective = 0.0;
    std::vector<double> x;
};
std::optional<SimplexResult> primal_simplex_solve(const leakqkd::LPProblem& p);
std::optional<double> primal_simplex_lp(const leakqkd::LPProblem& p);

/// Brute force for tiny LPs: every basic solution from num_vars active constraints.
/// Returns nullopt when no vertex is feasible.
std::optional<double> vertex_enumeration_lp(const leakqkd::LPProblem& p);

struct ChannelLD {
    long double gain;
    long double qber;
};
ChannelLD channel_ld(double gamma, double distance, double alpha, double eta_b, double eta_det,
                     double p_d, double e_d);

/// Largest delta_z on the grid {0, step, ..., 1} that satisfies the coin inequality.
double scan_phase_error(double fidelity, double fx, double fz, double dx, double n_over_click,
                        double step);

/// Trace distance between Binomial(n, eta) and Poisson(mu).
double binomial_poisson_distance(int n, double eta, double mu);

}  // namespace oracle
