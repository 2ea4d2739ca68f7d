#include "instances.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"

namespace oracle {

using namespace leakqkd;

namespace {

constexpr int kTruthPhotons = 80;

long double q_of(int n, long double gk, long double pk, long double gl, long double pl) {
    const long double a = pk * std::exp(-gk) * std::pow(gk, n);
    const long double b = pl * std::exp(-gl) * std::pow(gl, n);
    return a / (a + b);
}

// Shifts (ws, vw) inside the pair boxes that satisfy every three-setting row and keep the
// shifted profiles valid. Shrinks the sampling box until a draw fits.
std::array<double, 2> draw_shifts(std::mt19937_64& rng, const IntensityConfig& c,
                                  const LeakageDistances& d, int s_cut,
                                  const std::vector<double>& base,
                                  const std::vector<double>& cap) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double scale = 1.0;
    for (int attempt = 0; attempt < 2000; ++attempt) {
        if (attempt % 50 == 49) scale *= 0.5;
        const double ws = scale * d.d_ws * u(rng);
        const double vw = scale * d.d_vw * u(rng);
        bool ok = true;
        for (int n = 0; n <= s_cut && ok; ++n) {
            const double qvw = q_of(n, c.gamma_v, c.p_v, c.gamma_w, c.p_w);
            const double qsw = q_of(n, c.gamma_s, c.p_s, c.gamma_w, c.p_w);
            const double qsv = q_of(n, c.gamma_s, c.p_s, c.gamma_v, c.p_v);
            ok = std::abs(ws + qvw * vw) <= d.d_svw[n] && std::abs(qsw * ws + vw) <= d.d_vsw[n] &&
                 std::abs(qsv * ws - (1.0 - qsv) * vw) <= d.d_wsv[n];
        }
        for (int n = 0; n <= kTruthPhotons && ok; ++n) {
            for (double y : {base[n] + ws, base[n] + ws + vw}) ok = ok && y >= 0.0 && y <= cap[n];
        }
        if (ok) return {ws, vw};
    }
    return {0.0, 0.0};
}

}  // namespace

SyntheticInstance synthesize_instance(std::mt19937_64& rng, int s_cut) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SyntheticInstance out;
    IntensityConfig& c = out.cfg;
    c.gamma_s = 0.2 + 0.8 * u(rng);
    c.gamma_w = u(rng) < 0.5 ? 5e-4 : std::pow(10.0, -4.0 + 1.5 * u(rng));
    c.gamma_v = c.gamma_w + (0.8 * c.gamma_s - c.gamma_w) * u(rng);

    LeakageModel m;
    const double pick = u(rng);
    if (pick < 0.4) {
        m.leak_case = LeakageCase::FixedCoherent;
        m.i_max = std::pow(10.0, -10.0 + 7.0 * u(rng));
    } else if (pick < 0.8) {
        m.leak_case = LeakageCase::ModulatedCoherent;
        m.i_max = std::pow(10.0, -10.0 + 8.0 * u(rng));
    } else {
        m.leak_case = LeakageCase::PhaseRandomized;
        m.i_max = std::pow(10.0, -6.0 + 4.5 * u(rng));
    }
    m.theta_v = 2.0 * std::numbers::pi * u(rng);
    m.theta_w = m.theta_v + (2.0 * std::numbers::pi - m.theta_v) * u(rng);
    out.dist = distances_for_model(c, m, s_cut);

    // Signal yields: a lossy channel with dark counts, then jittered per photon number.
    const double eta = std::pow(10.0, -4.0 + 3.5 * u(rng));
    const double y0 = std::pow(10.0, -7.0 + 3.0 * u(rng));
    std::vector<double> yield(kTruthPhotons + 1);
    std::vector<double> wrong(kTruthPhotons + 1);
    std::vector<double> ones(kTruthPhotons + 1, 1.0);
    for (int n = 0; n <= kTruthPhotons; ++n) {
        const double clean = 1.0 - (1.0 - y0) * std::pow(1.0 - eta, n);
        yield[n] = n == 0 ? y0 : std::clamp(clean * (0.85 + 0.3 * u(rng)), 0.0, 1.0);
        const double e = n == 0 ? 0.5 : 0.005 + 0.08 * u(rng);
        wrong[n] = e * yield[n];
    }
    const auto dy = draw_shifts(rng, c, out.dist, s_cut, yield, ones);

    // Error-weighted yields get their own shifts and must stay below every shifted yield.
    std::vector<double> cap(kTruthPhotons + 1);
    for (int n = 0; n <= kTruthPhotons; ++n) {
        cap[n] = std::min({yield[n], yield[n] + dy[0], yield[n] + dy[0] + dy[1]});
        wrong[n] = std::min(wrong[n], cap[n]);  // so the zero shift is always a valid fallback
    }
    const auto dw = draw_shifts(rng, c, out.dist, s_cut, wrong, cap);

    const double gammas[3] = {c.gamma_s, c.gamma_v, c.gamma_w};
    const double shift_y[3] = {0.0, dy[0] + dy[1], dy[0]};
    const double shift_w[3] = {0.0, dw[0] + dw[1], dw[0]};
    for (int j = 0; j < 3; ++j) {
        const auto p = poisson_row(gammas[j], kTruthPhotons);
        long double q = 0.0L;
        long double qe = 0.0L;
        for (int n = 0; n <= kTruthPhotons; ++n) {
            q += p[n] * (yield[n] + shift_y[j]);
            qe += p[n] * (wrong[n] + shift_w[j]);
        }
        out.stats.z[j].gain = static_cast<double>(q);
        out.stats.z[j].qber = q > 0.0L ? static_cast<double>(qe / q) : 0.5;
    }
    out.stats.x = out.stats.z;
    out.y0_true = yield[0];
    out.y1_true = yield[1];
    out.e1_true = yield[1] > 0.0 ? wrong[1] / yield[1] : 0.5;
    out.yields = yield;
    out.weighted_errors = wrong;
    out.yield_shifts = dy;
    out.error_shifts = dw;
    return out;
}

LPProblem plain_decoy_lp(Objective objective, const std::array<SettingStats, 3>& stats,
                         const IntensityConfig& cfg, int s_cut) {
    LPProblem lp;
    lp.num_vars = s_cut + 1;
    lp.objective.assign(s_cut + 1, 0.0);
    lp.objective[objective == Objective::Y0 ? 0 : 1] = objective == Objective::Omega1 ? -1.0 : 1.0;
    const double gammas[3] = {cfg.gamma_s, cfg.gamma_v, cfg.gamma_w};
    for (int j = 0; j < 3; ++j) {
        const auto p = poisson_row(gammas[j], s_cut);
        long double head = 0.0L;
        LPRow row;
        for (int n = 0; n <= s_cut; ++n) {
            row.coeffs.push_back(static_cast<double>(p[n]));
            head += p[n];
        }
        const double observed =
            objective == Objective::Omega1 ? stats[j].gain * stats[j].qber : stats[j].gain;
        row.upper = observed;
        row.lower = observed - static_cast<double>(std::max(0.0L, 1.0L - head));
        lp.rows.push_back(row);
    }
    lp.var_lower.assign(s_cut + 1, 0.0);
    lp.var_upper.assign(s_cut + 1, 1.0);
    return lp;
}

PlainBounds plain_decoy_bounds(const ObservedStats& stats, const IntensityConfig& cfg, int s_cut) {
    PlainBounds out;
    const auto y0 = primal_simplex_lp(plain_decoy_lp(Objective::Y0, stats.z, cfg, s_cut));
    const auto y1 = primal_simplex_lp(plain_decoy_lp(Objective::Y1, stats.z, cfg, s_cut));
    const auto y1x = primal_simplex_lp(plain_decoy_lp(Objective::Y1, stats.x, cfg, s_cut));
    const auto om = primal_simplex_lp(plain_decoy_lp(Objective::Omega1, stats.x, cfg, s_cut));
    if (!y0 || !y1 || !y1x || !om) {
        out.infeasible = true;
        return out;
    }
    out.y0_l = std::clamp(*y0, 0.0, 1.0);
    out.y1_l = std::clamp(*y1, 0.0, 1.0);
    const double y1x_l = std::clamp(*y1x, 0.0, 1.0);
    out.e1_u = y1x_l > 0.0 ? std::clamp(-*om / y1x_l, 0.0, 1.0) : 1.0;
    return out;
}

}  // namespace oracle
