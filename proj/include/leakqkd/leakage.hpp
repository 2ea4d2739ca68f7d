#pragma once

#include <array>
#include <complex>
#include <vector>

namespace leakqkd {

/// The three decoy intensity settings, ordered gamma_s >= gamma_v >= gamma_w.
enum class Setting { Signal, Decoy, Weak };

/// Mean photon numbers of Alice's three settings and the probability of selecting each.
struct IntensityConfig {
    double gamma_s = 0.5;
    double gamma_v = 0.1;
    double gamma_w = 5e-4;
    double p_s = 1.0 / 3.0;
    double p_v = 1.0 / 3.0;
    double p_w = 1.0 / 3.0;

    double gamma(Setting s) const noexcept;
    double prob(Setting s) const noexcept;

    /// Throws DomainError unless gamma_s >= gamma_v >= gamma_w >= 0 and the
    /// probabilities lie in (0,1) and sum to one.
    void validate() const;
};

enum class LeakageCase {
    FixedCoherent = 1,      // every setting leaks |sqrt(I_max) e^{i theta}>
    ModulatedCoherent = 2,  // leaked intensity follows the setting, gamma_j/gamma_s * I_max
    PhaseRandomized = 3,    // as ModulatedCoherent, but Eve's light is phase randomized
};

/// Eve's view of the leaked light. theta_s is fixed to zero.
struct LeakageModel {
    LeakageCase leak_case = LeakageCase::FixedCoherent;
    double i_max = 0.0;
    double theta_v = 0.0;
    double theta_w = 0.0;
    int p_cut = 40;
    /// Replace the truncated phase-randomized upper bounds by the exact infinite sums.
    bool exact_sums = false;

    void validate() const;
};

/// Pair distances D_ws, D_vw and, per photon number n = 0..s_cut, the three-state
/// distances D_{n,s,v,w}, D_{n,v,s,w} and D_{n,w,s,v}.
struct LeakageDistances {
    double d_ws = 0.0;
    double d_vw = 0.0;
    std::vector<double> d_svw;
    std::vector<double> d_vsw;
    std::vector<double> d_wsv;

    static LeakageDistances zero(int s_cut);
    int s_cut() const noexcept { return static_cast<int>(d_svw.size()) - 1; }
};

enum class Ordering { SVW, VSW, WSV };

/// log of e^{-mu} mu^n / n!; -inf when the probability is exactly zero.
double log_poisson_pmf(double mu, int n);
double poisson_pmf(double mu, int n);

/// Probability that setting k was chosen, given an n-photon pulse from either k or l.
double q_cond(int n, Setting k, Setting l, const IntensityConfig& cfg);

/// <alpha|beta> for coherent states.
std::complex<double> coherent_overlap(std::complex<double> alpha, std::complex<double> beta);

/// Trace distance between two pure coherent states of intensities beta2_* and phases theta_*.
double d2_coherent(double beta2_j, double theta_j, double beta2_k, double theta_k);

/// Trace distance between |a1><a1| and the mixture p|a2><a2| + (1-p)|a3><a3|.
///
/// Uses the 3x3 non-orthogonal-basis representation of the difference operator,
/// whose (real, traceless) spectrum is obtained from its characteristic cubic.
double d3_coherent(std::complex<double> a1, std::complex<double> a2, std::complex<double> a3,
                   double p);

/// The three real eigenvalues behind d3_coherent, largest first.
std::array<double, 3> d3_coherent_spectrum(std::complex<double> a1, std::complex<double> a2,
                                           std::complex<double> a3, double p);

/// P_cut-truncated upper bound on the trace distance between two phase-randomized
/// coherent states. The larger intensity must not exceed ln 2.
double d2_phase_randomized(double beta2_j, double beta2_k, int p_cut);

/// The same distance summed to convergence.
double d2_phase_randomized_exact(double beta2_j, double beta2_k);

/// P_cut-truncated upper bound on the three-state distance for phase-randomized
/// leaks with intensities following the settings (gamma_j / gamma_s * I_max).
double d3_phase_randomized(const IntensityConfig& cfg, const LeakageModel& model, int n,
                           Ordering ordering);

double d3_phase_randomized_exact(const IntensityConfig& cfg, const LeakageModel& model, int n,
                                 Ordering ordering);

/// Extra distance incurred when Eve probes with Fock states instead of coherent states,
/// for a device transmissivity eta.
double fock_vs_poisson_bound(double eta);

/// Intensities (beta_s^2, beta_v^2, beta_w^2) of the leaked light for a model.
struct LeakedIntensities {
    double s;
    double v;
    double w;
};
LeakedIntensities leaked_intensities(const IntensityConfig& cfg, const LeakageModel& model);

LeakageDistances distances_for_model(const IntensityConfig& cfg, const LeakageModel& model,
                                     int s_cut);

}  // namespace leakqkd
