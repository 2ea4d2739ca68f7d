#pragma once

#include <functional>
#include <map>
#include <utility>

#include "leakqkd/channel.hpp"
#include "leakqkd/decoy_lp.hpp"
#include "leakqkd/leakage.hpp"

namespace leakqkd {

struct ProtocolParams {
    double q_eff = 1.0;
    double f_ec = 1.2;

    void validate() const;
};

/// Leakage from the phase modulator. The intensity seen by Eve is i_max_pm.
struct PmLeakage {
    bool enabled = false;
    double i_max_pm = 0.0;
};

struct PhaseErrorInputs {
    double fidelity = 1.0;
    double frac_x = 0.5;
    double frac_z = 0.5;
    double dx_given_x = 0.0;
    double n_over_click = 1.0;

    void validate() const;
};

double binary_entropy(double x);

/// q{p0 Y0L + p1 Y1L [1 - h(e)] - f Q h(E)} for the signal setting, unfloored.
/// A phase error above 1/2 is charged as 1/2.
double key_rate_raw(const DecoyBounds& bounds, const ObservedStats& stats,
                    const IntensityConfig& cfg, const ProtocolParams& proto, double phase_err);

/// key_rate_raw floored at zero.
double key_rate_point(const DecoyBounds& bounds, const ObservedStats& stats,
                      const IntensityConfig& cfg, const ProtocolParams& proto, double phase_err);

/// Fidelity between the basis-averaged PM leaks {|b>, |-b>} and {|ib>, |-ib>}, b^2 = i_max_pm.
double pm_fidelity(double i_max_pm);

/// Largest Z-basis phase error compatible with the quantum-coin inequality.
double phase_error_upper(const PhaseErrorInputs& inp);

double azuma_deviation_bound(double n, double delta);

/// Per (bit, basis) decoy quantities entering the correlated-leakage rate.
struct BitBasisBounds {
    double p0 = 0.0;
    double p1 = 0.0;
    double y0_l = 0.0;
    double y1_l = 0.0;
};
using CorrelatedBounds = std::map<std::pair<int, Basis>, BitBasisBounds>;

/// Sum over the two Z-basis bit values of q{p0 Y0L + p1 Y1L [1 - h(e)]}, minus
/// q f Q h(E) for the signal setting, floored at zero.
double key_rate_correlated(const CorrelatedBounds& per_bit, double phase_err_z,
                           const ObservedStats& stats, const ProtocolParams& proto);

/// Grid sizes of the max-min search. Refinement places (2r+1)^2 points within one
/// coarse step of the incumbent, r = refine.
struct GridSettings {
    int gamma_s_points = 24;
    int gamma_v_points = 16;
    int theta_points = 24;
    int refine = 8;
    double gamma_s_min = 0.05;
    double gamma_s_max = 1.0;

    void validate() const;
};

/// One run of the pipeline: channel statistics, leakage distances, LPs, phase error, rate.
struct PointEvaluation {
    double raw_rate = 0.0;
    double rate = 0.0;
    DecoyBounds bounds;
    double phase_err = 1.0;
    bool infeasible = false;
};

PointEvaluation evaluate_point(const IntensityConfig& cfg, const LeakageModel& model,
                               const ChannelParams& chan, const EstimatorConfig& est,
                               const ProtocolParams& proto, const PmLeakage& pm);

struct PhasePoint {
    double theta_v = 0.0;
    double theta_w = 0.0;
    double value = 0.0;
};

/// Minimum of f over theta_v in [0, 2pi], theta_w in [theta_v, 2pi]: coarse grid, then a
/// refined grid around the coarse minimiser.
PhasePoint minimize_over_phases(const std::function<double(double, double)>& f,
                                const GridSettings& grid);

struct SearchPoint {
    double gamma_s = 0.0;
    double gamma_v = 0.0;
    double theta_v = 0.0;
    double theta_w = 0.0;
    double value = 0.0;
};

/// max over (gamma_s, gamma_v) with gamma_s >= gamma_v >= gamma_w of min over the phases
/// (when `eve_phases`) of f(gamma_s, gamma_v, theta_v, theta_w).
SearchPoint maximin_search(const std::function<double(double, double, double, double)>& f,
                           const GridSettings& grid, double gamma_w, bool eve_phases);

struct EveResult {
    PointEvaluation eval;
    double theta_v = 0.0;
    double theta_w = 0.0;
};

/// Worst case over Eve's phases for fixed intensities. Phase-randomized leaks and
/// i_max = 0 have no phase dependence and are evaluated once.
EveResult eve_worst_case(const IntensityConfig& cfg, const LeakageModel& model,
                         const ChannelParams& chan, const EstimatorConfig& est,
                         const ProtocolParams& proto, const PmLeakage& pm,
                         const GridSettings& grid);

enum class RateStatus { Ok, ZeroRate, LpInfeasible, GridAllZero };
const char* to_string(RateStatus status) noexcept;

struct OptimalPoint {
    double rate = 0.0;
    double raw_rate = 0.0;
    double gamma_s = 0.0;
    double gamma_v = 0.0;
    double theta_v = 0.0;
    double theta_w = 0.0;
    DecoyBounds bounds;
    double phase_err = 1.0;
    RateStatus status = RateStatus::ZeroRate;
};

/// Everything optimize_key_rate needs besides distance, case and i_max.
struct EngineSettings {
    ChannelParams channel;
    EstimatorConfig estimator;
    ProtocolParams protocol;
    GridSettings grid;
    double gamma_w = 5e-4;
    int p_cut = 40;
    bool pm_enabled = false;
};

/// max over Alice's intensities of Eve's worst case. With PM leakage enabled the PM
/// probe receives the same intensity i_max as the IM.
OptimalPoint optimize_key_rate(double distance, LeakageCase leak_case, double i_max,
                               const EngineSettings& settings);

/// Largest distance in [lo, hi] with positive rate, located by bisection to `tol` km,
/// assuming the rate changes sign once. Returns lo when the rate at lo is already zero
/// and hi when the rate at hi is still positive.
double cutoff_distance(const std::function<double(double)>& rate_at, double lo, double hi,
                       double tol);

}  // namespace leakqkd
