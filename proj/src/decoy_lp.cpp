#include "leakqkd/decoy_lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "leakqkd/errors.hpp"
#include "leakqkd/poisson.hpp"

namespace leakqkd {

namespace {

constexpr std::array<Setting, 3> kSettings{Setting::Signal, Setting::Decoy, Setting::Weak};
constexpr std::array<const char*, 3> kNames{"s", "v", "w"};

bool same_stats(const std::array<SettingStats, 3>& a, const std::array<SettingStats, 3>& b) {
    for (int j = 0; j < 3; ++j) {
        if (a[j].gain != b[j].gain || a[j].qber != b[j].qber) return false;
    }
    return true;
}

// Returns the optimal objective, or NaN when the LP is infeasible.
double solve_objective(const LPProblem& lp, double tolerance) {
    const LPSolution sol = solve_lp(lp, tolerance);
    if (sol.status == LPStatus::Infeasible) return std::nan("");
    if (sol.status == LPStatus::Unbounded) {
        throw NumericalError("decoy LP reported unbounded; every variable is boxed");
    }
    return sol.objective;
}

}  // namespace

void ObservedStats::validate() const {
    for (const auto* basis : {&z, &x}) {
        for (const SettingStats& s : *basis) {
            if (!(s.gain >= 0.0 && s.gain <= 1.0)) throw DomainError("gain must lie in [0,1]");
            if (!(s.qber >= 0.0 && s.qber <= 1.0)) throw DomainError("QBER must lie in [0,1]");
        }
    }
}

void EstimatorConfig::validate() const {
    if (s_cut < 2) throw DomainError("s_cut must be >= 2");
    if (!(lp_tolerance > 0.0 && lp_tolerance <= 1e-6)) {
        throw DomainError("lp_tolerance must lie in (0, 1e-6]");
    }
}

double gamma_tail(double gamma, int s_cut) {
    if (s_cut < 0) throw DomainError("s_cut must be non-negative");
    return std::clamp(poisson_tail(gamma, s_cut + 1), 0.0, 1.0);
}

LPProblem build_lp(Objective objective, const std::array<SettingStats, 3>& stats,
                   const LeakageDistances& dist, const IntensityConfig& cfg,
                   const EstimatorConfig& est) {
    cfg.validate();
    est.validate();
    const int s_cut = est.s_cut;
    if (dist.s_cut() < s_cut) {
        throw DomainError("leakage distances cover n <= " + std::to_string(dist.s_cut()) +
                          " but the LP needs n <= " + std::to_string(s_cut));
    }
    const int nv = s_cut + 3;
    const int ws = delta_ws_index(s_cut);
    const int vw = delta_vw_index(s_cut);

    LPProblem lp;
    lp.num_vars = nv;
    lp.objective.assign(nv, 0.0);
    switch (objective) {
        case Objective::Y0: lp.objective[0] = 1.0; break;
        case Objective::Y1: lp.objective[1] = 1.0; break;
        case Objective::Omega1: lp.objective[1] = -1.0; break;
    }

    // Y_n^v = Y_n^s + Dws + Dvw and Y_n^w = Y_n^s + Dws.
    constexpr std::array<std::array<double, 2>, 3> shift{{{0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}}};
    for (int j = 0; j < 3; ++j) {
        const Setting s = kSettings[j];
        const double g = cfg.gamma(s);
        const double observed = objective == Objective::Omega1 ? stats[j].gain * stats[j].qber
                                                               : stats[j].gain;
        if (!(observed >= 0.0 && observed <= 1.0)) {
            throw DomainError(std::string("observed value for setting ") + kNames[j] +
                              " must lie in [0,1]");
        }
        const double tail = gamma_tail(g, s_cut);
        LPRow row;
        row.coeffs.assign(nv, 0.0);
        for (int n = 0; n <= s_cut; ++n) row.coeffs[n] = poisson_pmf(g, n);
        row.coeffs[ws] = shift[j][0];
        row.coeffs[vw] = shift[j][1];
        row.lower = observed - tail;
        row.upper = observed;
        row.label = std::string("gain_") + kNames[j];
        lp.rows.push_back(std::move(row));
    }

    for (int n = 0; n <= s_cut; ++n) {
        const double q_vw = q_cond(n, Setting::Decoy, Setting::Weak, cfg);
        const double q_sw = q_cond(n, Setting::Signal, Setting::Weak, cfg);
        const double q_sv = q_cond(n, Setting::Signal, Setting::Decoy, cfg);
        const std::array<std::array<double, 3>, 3> three{{
            {1.0, q_vw, dist.d_svw[n]},
            {q_sw, 1.0, dist.d_vsw[n]},
            {q_sv, -(1.0 - q_sv), dist.d_wsv[n]},
        }};
        constexpr std::array<const char*, 3> tags{"svw", "vsw", "wsv"};
        for (int r = 0; r < 3; ++r) {
            LPRow row;
            row.coeffs.assign(nv, 0.0);
            row.coeffs[ws] = three[r][0];
            row.coeffs[vw] = three[r][1];
            row.lower = -three[r][2];
            row.upper = three[r][2];
            row.label = std::string(tags[r]) + "_" + std::to_string(n);
            lp.rows.push_back(std::move(row));
        }
    }

    lp.var_lower.assign(nv, 0.0);
    lp.var_upper.assign(nv, 1.0);
    lp.var_lower[ws] = -dist.d_ws;
    lp.var_upper[ws] = dist.d_ws;
    lp.var_lower[vw] = -dist.d_vw;
    lp.var_upper[vw] = dist.d_vw;
    return lp;
}

DecoyBounds estimate_bounds(const ObservedStats& stats, const LeakageDistances& dist,
                            const IntensityConfig& cfg, const EstimatorConfig& est) {
    stats.validate();
    const double tol = est.lp_tolerance;
    DecoyBounds out;

    const double y0 = solve_objective(build_lp(Objective::Y0, stats.z, dist, cfg, est), tol);
    const double y1 = solve_objective(build_lp(Objective::Y1, stats.z, dist, cfg, est), tol);
    double y1x = y1;
    if (!same_stats(stats.z, stats.x)) {
        y1x = solve_objective(build_lp(Objective::Y1, stats.x, dist, cfg, est), tol);
    }
    const double omega =
        solve_objective(build_lp(Objective::Omega1, stats.x, dist, cfg, est), tol);

    if (std::isnan(y0) || std::isnan(y1) || std::isnan(y1x) || std::isnan(omega)) {
        out.infeasible = true;
        return out;
    }
    out.y0_l = std::clamp(y0, 0.0, 1.0);
    out.y1_l = std::clamp(y1, 0.0, 1.0);
    out.y1_l_x = std::clamp(y1x, 0.0, 1.0);
    out.e1_u = out.y1_l_x > 0.0 ? std::clamp(-omega / out.y1_l_x, 0.0, 1.0) : 1.0;
    return out;
}

}  // namespace leakqkd
