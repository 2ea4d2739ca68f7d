#include "leakqkd/leakage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "leakqkd/cubic.hpp"
#include "leakqkd/errors.hpp"
#include "leakqkd/poisson.hpp"

namespace leakqkd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAngleSlack = 1e-12;

void require_intensity(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) {
        throw DomainError(std::string(what) + " must be a finite non-negative intensity");
    }
}

// e^{w} - 1 for complex w without cancellation near w = 0.
std::complex<double> complex_expm1(std::complex<double> w) {
    const double u = w.real();
    const double v = w.imag();
    const double s = std::sin(0.5 * v);
    const double re = std::expm1(u) * std::cos(v) - 2.0 * s * s;
    const double im = std::exp(u) * std::sin(v);
    return {re, im};
}

// 1 - |<a|b>|^2 for coherent states.
double one_minus_overlap_sq(std::complex<double> a, std::complex<double> b) {
    return -std::expm1(-std::norm(a - b));
}

struct ThreeIntensities {
    double j;
    double k;
    double l;
    Setting k_setting;
    Setting l_setting;
    double envelope;  // bound on the tail terms relative to the signal leak's Poisson weight
};

ThreeIntensities arrange(const IntensityConfig& cfg, const LeakageModel& model, int n,
                         Ordering ordering, double& q_out) {
    const LeakedIntensities b = leaked_intensities(cfg, model);
    switch (ordering) {
        case Ordering::SVW:
            q_out = q_cond(n, Setting::Decoy, Setting::Weak, cfg);
            return {b.s, b.v, b.w, Setting::Decoy, Setting::Weak, 1.0};
        case Ordering::VSW:
            q_out = q_cond(n, Setting::Signal, Setting::Weak, cfg);
            return {b.v, b.s, b.w, Setting::Signal, Setting::Weak,
                    q_out + (1.0 - q_out) * std::exp(b.s)};
        case Ordering::WSV:
            q_out = q_cond(n, Setting::Signal, Setting::Decoy, cfg);
            return {b.w, b.s, b.v, Setting::Signal, Setting::Decoy,
                    q_out + (1.0 - q_out) * std::exp(b.s)};
    }
    throw DomainError("unknown ordering");
}

void require_phase_randomized_validity(const IntensityConfig& cfg, const LeakageModel& model) {
    cfg.validate();
    model.validate();
    if (model.i_max > std::numbers::ln2) {
        throw DomainError("phase-randomized bound requires i_max <= ln 2");
    }
}

// Number of Poisson terms after which every intensity <= mu_max has negligible weight.
int convergence_cutoff(double mu_max) {
    return static_cast<int>(std::ceil(mu_max + 12.0 * std::sqrt(mu_max + 1.0))) + 60;
}

}  // namespace

double IntensityConfig::gamma(Setting s) const noexcept {
    switch (s) {
        case Setting::Signal: return gamma_s;
        case Setting::Decoy: return gamma_v;
        case Setting::Weak: return gamma_w;
    }
    return 0.0;
}

double IntensityConfig::prob(Setting s) const noexcept {
    switch (s) {
        case Setting::Signal: return p_s;
        case Setting::Decoy: return p_v;
        case Setting::Weak: return p_w;
    }
    return 0.0;
}

void IntensityConfig::validate() const {
    for (double g : {gamma_s, gamma_v, gamma_w}) {
        require_intensity(g, "intensity");
    }
    if (!(gamma_s >= gamma_v && gamma_v >= gamma_w)) {
        throw DomainError("intensities must satisfy gamma_s >= gamma_v >= gamma_w");
    }
    for (double p : {p_s, p_v, p_w}) {
        if (!(p > 0.0 && p < 1.0)) {
            throw DomainError("selection probabilities must lie in (0,1)");
        }
    }
    if (std::abs(p_s + p_v + p_w - 1.0) > 1e-12) {
        throw DomainError("selection probabilities must sum to 1");
    }
}

void LeakageModel::validate() const {
    require_intensity(i_max, "i_max");
    if (!(theta_v >= -kAngleSlack && theta_v <= kTwoPi + kAngleSlack)) {
        throw DomainError("theta_v must lie in [0, 2pi]");
    }
    if (!(theta_w >= theta_v - kAngleSlack && theta_w <= kTwoPi + kAngleSlack)) {
        throw DomainError("theta_w must lie in [theta_v, 2pi]");
    }
    if (p_cut < 1) {
        throw DomainError("p_cut must be >= 1");
    }
    if (leak_case == LeakageCase::PhaseRandomized && i_max > std::numbers::ln2) {
        throw DomainError("phase-randomized leakage requires i_max <= ln 2");
    }
}

LeakageDistances LeakageDistances::zero(int s_cut) {
    if (s_cut < 0) {
        throw DomainError("s_cut must be non-negative");
    }
    LeakageDistances d;
    const auto len = static_cast<std::size_t>(s_cut) + 1;
    d.d_svw.assign(len, 0.0);
    d.d_vsw.assign(len, 0.0);
    d.d_wsv.assign(len, 0.0);
    return d;
}

double log_poisson_pmf(double mu, int n) {
    if (!(mu >= 0.0) || !std::isfinite(mu)) {
        throw DomainError("Poisson mean must be finite and non-negative");
    }
    if (n < 0) {
        throw DomainError("photon number must be non-negative");
    }
    if (mu == 0.0) {
        return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    return -mu + n * std::log(mu) - std::lgamma(n + 1.0);
}

double poisson_pmf(double mu, int n) { return std::exp(log_poisson_pmf(mu, n)); }

double q_cond(int n, Setting k, Setting l, const IntensityConfig& cfg) {
    if (k == l) {
        throw DomainError("q_cond requires two distinct settings");
    }
    const double a = std::log(cfg.prob(k)) + log_poisson_pmf(cfg.gamma(k), n);
    const double b = std::log(cfg.prob(l)) + log_poisson_pmf(cfg.gamma(l), n);
    if (std::isinf(a) && std::isinf(b)) {
        throw DomainError("q_cond undefined: both settings have zero weight at n = " +
                          std::to_string(n));
    }
    if (std::isinf(a)) return 0.0;
    if (std::isinf(b)) return 1.0;
    return 1.0 / (1.0 + std::exp(b - a));
}

std::complex<double> coherent_overlap(std::complex<double> alpha, std::complex<double> beta) {
    return std::exp(-0.5 * (std::norm(alpha) + std::norm(beta)) + std::conj(alpha) * beta);
}

double d2_coherent(double beta2_j, double theta_j, double beta2_k, double theta_k) {
    require_intensity(beta2_j, "beta2_j");
    require_intensity(beta2_k, "beta2_k");
    const auto aj = std::polar(std::sqrt(beta2_j), theta_j);
    const auto ak = std::polar(std::sqrt(beta2_k), theta_k);
    return std::sqrt(std::clamp(one_minus_overlap_sq(aj, ak), 0.0, 1.0));
}

std::array<double, 3> d3_coherent_spectrum(std::complex<double> a1, std::complex<double> a2,
                                           std::complex<double> a3, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("mixture weight p must lie in [0,1]");
    }
    for (auto a : {a1, a2, a3}) {
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
            throw DomainError("coherent amplitudes must be finite");
        }
    }
    const std::array<std::complex<double>, 3> alpha{a1, a2, a3};
    const std::array<double, 3> c{1.0, -p, -(1.0 - p)};

    // Direct coefficients of the characteristic polynomial of A, used only to confirm
    // that they are real as the Hermitian similarity requires.
    std::array<std::array<std::complex<double>, 3>, 3> A{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            A[i][j] = c[i] * coherent_overlap(alpha[i], alpha[j]);
        }
    }
    const auto minor = [&](int i, int j) { return A[i][i] * A[j][j] - A[i][j] * A[j][i]; };
    const std::complex<double> minors_direct = minor(0, 1) + minor(0, 2) + minor(1, 2);
    const std::complex<double> det_direct =
        A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
        A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
        A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
    const std::complex<double> trace_direct = A[0][0] + A[1][1] + A[2][2];
    constexpr double kImagTol = 1e-10;
    if (std::abs(minors_direct.imag()) > kImagTol || std::abs(det_direct.imag()) > kImagTol ||
        std::abs(trace_direct.imag()) > kImagTol) {
        throw NumericalError("characteristic polynomial of the 3x3 distance matrix is not real");
    }

    // Cancellation-free forms of the same coefficients. The Gram determinant is evaluated
    // after displacing every state by -a1, which changes the Gram matrix only by a
    // diagonal unitary similarity.
    const double e12 = one_minus_overlap_sq(a1, a2);
    const double e13 = one_minus_overlap_sq(a1, a3);
    const double e23 = one_minus_overlap_sq(a2, a3);
    const double minors = c[0] * c[1] * e12 + c[0] * c[2] * e13 + c[1] * c[2] * e23;

    const std::complex<double> a = a2 - a1;
    const std::complex<double> b = a3 - a1;
    const std::complex<double> schur_offdiag =
        std::exp(-0.5 * (std::norm(a) + std::norm(b))) * complex_expm1(std::conj(a) * b);
    const double gram_det = std::max(0.0, e12 * e13 - std::norm(schur_offdiag));
    const double det = c[0] * c[1] * c[2] * gram_det;

    // lambda^3 - tr lambda^2 + minors lambda - det = 0 with tr = 1 - p - (1 - p) = 0.
    return depressed_cubic_real_roots(minors, -det);
}

double d3_coherent(std::complex<double> a1, std::complex<double> a2, std::complex<double> a3,
                   double p) {
    const auto lambda = d3_coherent_spectrum(a1, a2, a3, p);
    const double norm = std::abs(lambda[0]) + std::abs(lambda[1]) + std::abs(lambda[2]);
    return std::clamp(0.5 * norm, 0.0, 1.0);
}

double d2_phase_randomized(double beta2_j, double beta2_k, int p_cut) {
    require_intensity(beta2_j, "beta2_j");
    require_intensity(beta2_k, "beta2_k");
    if (p_cut < 1) {
        throw DomainError("p_cut must be >= 1");
    }
    const double ref = std::max(beta2_j, beta2_k);
    if (ref > std::numbers::ln2) {
        throw DomainError("truncated phase-randomized bound requires the larger intensity <= ln 2");
    }
    double sum = 0.0;
    for (int m = 0; m <= p_cut; ++m) {
        sum += std::abs(poisson_pmf(beta2_j, m) - poisson_pmf(beta2_k, m));
    }
    const double bound = 0.5 * (poisson_tail(ref, p_cut + 1) + sum);
    return std::clamp(bound, 0.0, 1.0);
}

double d2_phase_randomized_exact(double beta2_j, double beta2_k) {
    require_intensity(beta2_j, "beta2_j");
    require_intensity(beta2_k, "beta2_k");
    const int last = convergence_cutoff(std::max(beta2_j, beta2_k));
    double sum = 0.0;
    for (int m = 0; m <= last; ++m) {
        sum += std::abs(poisson_pmf(beta2_j, m) - poisson_pmf(beta2_k, m));
    }
    return std::clamp(0.5 * sum, 0.0, 1.0);
}

double d3_phase_randomized(const IntensityConfig& cfg, const LeakageModel& model, int n,
                           Ordering ordering) {
    require_phase_randomized_validity(cfg, model);
    if (n < 0) {
        throw DomainError("photon number must be non-negative");
    }
    double q = 0.0;
    const ThreeIntensities t = arrange(cfg, model, n, ordering, q);
    const double ref = leaked_intensities(cfg, model).s;
    double sum = 0.0;
    for (int m = 0; m <= model.p_cut; ++m) {
        sum += std::abs(poisson_pmf(t.j, m) - q * poisson_pmf(t.k, m) -
                        (1.0 - q) * poisson_pmf(t.l, m));
    }
    const double bound = 0.5 * (t.envelope * poisson_tail(ref, model.p_cut + 1) + sum);
    return std::clamp(bound, 0.0, 1.0);
}

double d3_phase_randomized_exact(const IntensityConfig& cfg, const LeakageModel& model, int n,
                                 Ordering ordering) {
    cfg.validate();
    model.validate();
    if (n < 0) {
        throw DomainError("photon number must be non-negative");
    }
    double q = 0.0;
    const ThreeIntensities t = arrange(cfg, model, n, ordering, q);
    const int last = convergence_cutoff(std::max({t.j, t.k, t.l}));
    double sum = 0.0;
    for (int m = 0; m <= last; ++m) {
        sum += std::abs(poisson_pmf(t.j, m) - q * poisson_pmf(t.k, m) -
                        (1.0 - q) * poisson_pmf(t.l, m));
    }
    return std::clamp(0.5 * sum, 0.0, 1.0);
}

double fock_vs_poisson_bound(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw DomainError("transmissivity must lie in [0,1]");
    }
    return 2.0 * eta;
}

LeakedIntensities leaked_intensities(const IntensityConfig& cfg, const LeakageModel& model) {
    if (model.leak_case == LeakageCase::FixedCoherent) {
        return {model.i_max, model.i_max, model.i_max};
    }
    if (cfg.gamma_s <= 0.0) {
        return {model.i_max, 0.0, 0.0};
    }
    return {model.i_max, cfg.gamma_v / cfg.gamma_s * model.i_max,
            cfg.gamma_w / cfg.gamma_s * model.i_max};
}

LeakageDistances distances_for_model(const IntensityConfig& cfg, const LeakageModel& model,
                                     int s_cut) {
    cfg.validate();
    model.validate();
    if (s_cut < 1) {
        throw DomainError("s_cut must be >= 1");
    }
    LeakageDistances out = LeakageDistances::zero(s_cut);
    if (model.i_max == 0.0) {
        return out;
    }

    const LeakedIntensities b = leaked_intensities(cfg, model);
    if (model.leak_case == LeakageCase::PhaseRandomized) {
        if (model.exact_sums) {
            out.d_ws = d2_phase_randomized_exact(b.w, b.s);
            out.d_vw = d2_phase_randomized_exact(b.v, b.w);
        } else {
            out.d_ws = d2_phase_randomized(b.w, b.s, model.p_cut);
            out.d_vw = d2_phase_randomized(b.v, b.w, model.p_cut);
        }
        const auto d3 = model.exact_sums ? d3_phase_randomized_exact : d3_phase_randomized;
        for (int n = 0; n <= s_cut; ++n) {
            out.d_svw[n] = d3(cfg, model, n, Ordering::SVW);
            out.d_vsw[n] = d3(cfg, model, n, Ordering::VSW);
            out.d_wsv[n] = d3(cfg, model, n, Ordering::WSV);
        }
        return out;
    }

    const auto as = std::polar(std::sqrt(b.s), 0.0);
    const auto av = std::polar(std::sqrt(b.v), model.theta_v);
    const auto aw = std::polar(std::sqrt(b.w), model.theta_w);
    out.d_ws = d2_coherent(b.w, model.theta_w, b.s, 0.0);
    out.d_vw = d2_coherent(b.v, model.theta_v, b.w, model.theta_w);
    for (int n = 0; n <= s_cut; ++n) {
        out.d_svw[n] = d3_coherent(as, av, aw, q_cond(n, Setting::Decoy, Setting::Weak, cfg));
        out.d_vsw[n] = d3_coherent(av, as, aw, q_cond(n, Setting::Signal, Setting::Weak, cfg));
        out.d_wsv[n] = d3_coherent(aw, as, av, q_cond(n, Setting::Signal, Setting::Decoy, cfg));
    }
    return out;
}

}  // namespace leakqkd
