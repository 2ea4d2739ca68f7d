#include "leakqkd/keyrate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "leakqkd/errors.hpp"

namespace leakqkd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

double rhs_of_coin_inequality(const PhaseErrorInputs& in, double delta_z) {
    return 2.0 * std::sqrt(in.frac_x * in.dx_given_x * in.frac_z * delta_z) +
           2.0 * std::sqrt(in.frac_x * (1.0 - in.dx_given_x) * in.frac_z * (1.0 - delta_z));
}

// Weights of the photon-number classes m = r (mod 4) in a coherent state of intensity mu.
std::array<double, 4> mod4_weights(double mu) {
    std::array<double, 4> w{0.0, 0.0, 0.0, 0.0};
    if (mu == 0.0) {
        w[0] = 1.0;
        return w;
    }
    const int last = static_cast<int>(std::ceil(mu + 12.0 * std::sqrt(mu + 1.0))) + 60;
    for (int m = 0; m <= last; ++m) w[m % 4] += poisson_pmf(mu, m);
    return w;
}

}  // namespace

void ProtocolParams::validate() const {
    if (!(q_eff > 0.0 && q_eff <= 1.0)) throw DomainError("q_eff must lie in (0,1]");
    if (!(f_ec >= 1.0) || !std::isfinite(f_ec)) throw DomainError("f_ec must be >= 1");
}

void PhaseErrorInputs::validate() const {
    if (!unit_interval(fidelity)) throw DomainError("fidelity must lie in [0,1]");
    if (!unit_interval(frac_x) || !unit_interval(frac_z)) {
        throw DomainError("basis fractions must lie in [0,1]");
    }
    if (std::abs(frac_x + frac_z - 1.0) > 1e-12) {
        throw DomainError("basis fractions must sum to 1");
    }
    if (!unit_interval(dx_given_x)) throw DomainError("X-basis error must lie in [0,1]");
    if (!(n_over_click >= 1.0)) throw DomainError("n_over_click must be >= 1");
}

void GridSettings::validate() const {
    if (gamma_s_points < 2 || gamma_v_points < 2 || theta_points < 2) {
        throw DomainError("every grid axis needs at least 2 points");
    }
    if (refine < 0) throw DomainError("grid refinement must be >= 0");
    if (!(gamma_s_min > 0.0 && gamma_s_min < gamma_s_max)) {
        throw DomainError("gamma_s range must satisfy 0 < min < max");
    }
}

double binary_entropy(double x) {
    if (!unit_interval(x)) throw DomainError("binary entropy argument must lie in [0,1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double key_rate_raw(const DecoyBounds& bounds, const ObservedStats& stats,
                    const IntensityConfig& cfg, const ProtocolParams& proto, double phase_err) {
    proto.validate();
    if (!unit_interval(phase_err)) throw DomainError("phase error must lie in [0,1]");
    const SettingStats& sig = stats.at(Basis::Z, Setting::Signal);
    const double p0 = poisson_pmf(cfg.gamma_s, 0);
    const double p1 = poisson_pmf(cfg.gamma_s, 1);
    const double privacy = 1.0 - binary_entropy(std::min(phase_err, 0.5));
    const double leak_ec = proto.f_ec * sig.gain * binary_entropy(std::min(sig.qber, 1.0));
    return proto.q_eff * (p0 * bounds.y0_l + p1 * bounds.y1_l * privacy - leak_ec);
}

double key_rate_point(const DecoyBounds& bounds, const ObservedStats& stats,
                      const IntensityConfig& cfg, const ProtocolParams& proto, double phase_err) {
    return std::max(0.0, key_rate_raw(bounds, stats, cfg, proto, phase_err));
}

double pm_fidelity(double i_max_pm) {
    if (!(i_max_pm >= 0.0) || !std::isfinite(i_max_pm)) {
        throw DomainError("PM leak intensity must be finite and non-negative");
    }
    if (i_max_pm == 0.0) return 1.0;  // no leak: identical states
    // |i^k b> = sum_r i^{kr} sqrt(lambda_r) |e_r>, with |e_r> the normalised projection onto
    // photon numbers r mod 4: an orthonormal frame for the span of the four states.
    const auto lambda = mod4_weights(i_max_pm);
    using Mat = Eigen::Matrix<std::complex<double>, 4, 2>;
    const std::complex<double> i_unit(0.0, 1.0);
    const auto state = [&](int k) {
        Eigen::Matrix<std::complex<double>, 4, 1> psi;
        for (int r = 0; r < 4; ++r) psi(r) = std::pow(i_unit, k * r) * std::sqrt(lambda[r]);
        return psi;
    };
    Mat a;
    Mat b;
    a << state(0), state(2);
    b << state(1), state(3);
    a *= std::sqrt(0.5);
    b *= std::sqrt(0.5);
    // rho_Z = a a^dag, rho_X = b b^dag, so the fidelity is the trace norm of a^dag b.
    const Eigen::Matrix2cd overlap = a.adjoint() * b;
    const Eigen::JacobiSVD<Eigen::Matrix2cd> svd(overlap);
    return std::clamp(svd.singularValues().sum(), 0.0, 1.0);
}

double phase_error_upper(const PhaseErrorInputs& inp) {
    inp.validate();
    const double lhs = 1.0 - inp.n_over_click * (1.0 - inp.fidelity);
    if (lhs <= 0.0) return 1.0;
    // The right-hand side is concave in delta_z with its maximum 2 sqrt(fx fz) at dx.
    if (lhs >= 2.0 * std::sqrt(inp.frac_x * inp.frac_z)) return inp.dx_given_x;
    if (rhs_of_coin_inequality(inp, 1.0) >= lhs) return 1.0;
    double lo = inp.dx_given_x;  // consistent
    double hi = 1.0;             // inconsistent
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (rhs_of_coin_inequality(inp, mid) >= lhs) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

double azuma_deviation_bound(double n, double delta) {
    if (!(n >= 1.0)) throw DomainError("Azuma bound needs n >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("Azuma bound needs delta in (0,1)");
    return 2.0 * std::exp(-n * delta * delta / 2.0);
}

double key_rate_correlated(const CorrelatedBounds& per_bit, double phase_err_z,
                           const ObservedStats& stats, const ProtocolParams& proto) {
    proto.validate();
    if (!unit_interval(phase_err_z)) throw DomainError("phase error must lie in [0,1]");
    const double privacy = 1.0 - binary_entropy(std::min(phase_err_z, 0.5));
    double sum = 0.0;
    for (int bit : {0, 1}) {
        const auto it = per_bit.find({bit, Basis::Z});
        if (it == per_bit.end()) {
            throw DomainError("missing bounds for bit " + std::to_string(bit) + " in the Z basis");
        }
        const BitBasisBounds& b = it->second;
        for (double v : {b.p0, b.p1, b.y0_l, b.y1_l}) {
            if (!unit_interval(v)) throw DomainError("per-bit bounds must lie in [0,1]");
        }
        sum += b.p0 * b.y0_l + b.p1 * b.y1_l * privacy;
    }
    const SettingStats& sig = stats.at(Basis::Z, Setting::Signal);
    const double leak_ec = proto.f_ec * sig.gain * binary_entropy(std::min(sig.qber, 1.0));
    return std::max(0.0, proto.q_eff * sum - proto.q_eff * leak_ec);
}

PointEvaluation evaluate_point(const IntensityConfig& cfg, const LeakageModel& model,
                               const ChannelParams& chan, const EstimatorConfig& est,
                               const ProtocolParams& proto, const PmLeakage& pm) {
    const ObservedStats stats = simulate_observations(chan, cfg);
    const LeakageDistances dist = distances_for_model(cfg, model, est.s_cut);
    PointEvaluation out;
    out.bounds = estimate_bounds(stats, dist, cfg, est);
    out.infeasible = out.bounds.infeasible;
    out.phase_err = out.bounds.e1_u;
    if (!out.infeasible && pm.enabled) {
        const double single = poisson_pmf(cfg.gamma_s, 1) * out.bounds.y1_l;
        if (single > 0.0) {
            PhaseErrorInputs in;
            in.fidelity = pm_fidelity(pm.i_max_pm);
            in.dx_given_x = out.bounds.e1_u;
            in.n_over_click = std::max(1.0, 1.0 / single);
            out.phase_err = phase_error_upper(in);
        } else {
            out.phase_err = 1.0;
        }
    }
    out.raw_rate = key_rate_raw(out.bounds, stats, cfg, proto, out.phase_err);
    out.rate = std::max(0.0, out.raw_rate);
    return out;
}

PhasePoint minimize_over_phases(const std::function<double(double, double)>& f,
                                const GridSettings& grid) {
    grid.validate();
    const int n = grid.theta_points;
    const double step = kTwoPi / (n - 1);
    const auto angle = [](double t) { return std::clamp(t, 0.0, kTwoPi); };

    PhasePoint best;
    bool have = false;
    const auto consider = [&](double tv, double tw) {
        const double v = f(tv, tw);
        if (!have || v < best.value) {
            best = {tv, tw, v};
            have = true;
        }
    };
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) consider(angle(i * step), angle(j * step));
    }
    if (grid.refine > 0) {
        const PhasePoint centre = best;
        const int r = grid.refine;
        const double fine = step / r;
        for (int a = -r; a <= r; ++a) {
            for (int b = -r; b <= r; ++b) {
                if (a == 0 && b == 0) continue;
                const double tv = centre.theta_v + a * fine;
                const double tw = centre.theta_w + b * fine;
                if (tv < 0.0 || tw > kTwoPi || tw < tv) continue;
                consider(tv, tw);
            }
        }
    }
    return best;
}

SearchPoint maximin_search(const std::function<double(double, double, double, double)>& f,
                           const GridSettings& grid, double gamma_w, bool eve_phases) {
    grid.validate();
    if (!(gamma_w >= 0.0 && gamma_w < grid.gamma_s_min)) {
        throw DomainError("gamma_w must be non-negative and below the gamma_s range");
    }
    const double u_min = std::log(grid.gamma_s_min);
    const double u_max = std::log(grid.gamma_s_max);
    const double du = (u_max - u_min) / (grid.gamma_s_points - 1);
    const double dt = 1.0 / (grid.gamma_v_points - 1);
    const double floor_w = gamma_w > 0.0 ? gamma_w : 1e-12 * grid.gamma_s_min;

    // gamma_v is log-spaced between gamma_w and gamma_s: gamma_v = gamma_w (gamma_s/gamma_w)^t.
    SearchPoint best;
    bool have = false;
    const auto consider = [&](double u, double t) {
        const double gs = std::exp(u);
        double gv = floor_w * std::pow(gs / floor_w, t);
        gv = std::clamp(gv, gamma_w, gs);
        SearchPoint p{gs, gv, 0.0, 0.0, 0.0};
        if (eve_phases) {
            const PhasePoint worst = minimize_over_phases(
                [&](double tv, double tw) { return f(gs, gv, tv, tw); }, grid);
            p.theta_v = worst.theta_v;
            p.theta_w = worst.theta_w;
            p.value = worst.value;
        } else {
            p.value = f(gs, gv, 0.0, 0.0);
        }
        if (!have || p.value > best.value) {
            best = p;
            have = true;
            return true;
        }
        return false;
    };

    double best_u = u_min;
    double best_t = 0.0;
    for (int i = 0; i < grid.gamma_s_points; ++i) {
        const double u = i + 1 == grid.gamma_s_points ? u_max : u_min + i * du;
        for (int j = 0; j < grid.gamma_v_points; ++j) {
            const double t = j + 1 == grid.gamma_v_points ? 1.0 : j * dt;
            if (consider(u, t)) {
                best_u = u;
                best_t = t;
            }
        }
    }
    if (grid.refine > 0) {
        const int r = grid.refine;
        const double cu = best_u;
        const double ct = best_t;
        for (int a = -r; a <= r; ++a) {
            for (int b = -r; b <= r; ++b) {
                if (a == 0 && b == 0) continue;
                const double u = cu + a * du / r;
                const double t = ct + b * dt / r;
                if (u < u_min - 1e-12 || u > u_max + 1e-12 || t < 0.0 || t > 1.0) continue;
                consider(std::clamp(u, u_min, u_max), t);
            }
        }
    }
    return best;
}

EveResult eve_worst_case(const IntensityConfig& cfg, const LeakageModel& model,
                         const ChannelParams& chan, const EstimatorConfig& est,
                         const ProtocolParams& proto, const PmLeakage& pm,
                         const GridSettings& grid) {
    LeakageModel m = model;
    EveResult out;
    if (model.leak_case == LeakageCase::PhaseRandomized || model.i_max == 0.0) {
        m.theta_v = 0.0;
        m.theta_w = 0.0;
        out.eval = evaluate_point(cfg, m, chan, est, proto, pm);
        return out;
    }
    const PhasePoint worst = minimize_over_phases(
        [&](double tv, double tw) {
            m.theta_v = tv;
            m.theta_w = tw;
            return evaluate_point(cfg, m, chan, est, proto, pm).raw_rate;
        },
        grid);
    m.theta_v = worst.theta_v;
    m.theta_w = worst.theta_w;
    out.eval = evaluate_point(cfg, m, chan, est, proto, pm);
    out.theta_v = worst.theta_v;
    out.theta_w = worst.theta_w;
    return out;
}

const char* to_string(RateStatus status) noexcept {
    switch (status) {
        case RateStatus::Ok: return "ok";
        case RateStatus::ZeroRate: return "zero_rate";
        case RateStatus::LpInfeasible: return "lp_infeasible";
        case RateStatus::GridAllZero: return "grid_all_zero";
    }
    return "unknown";
}

OptimalPoint optimize_key_rate(double distance, LeakageCase leak_case, double i_max,
                               const EngineSettings& settings) {
    if (!(distance >= 0.0)) throw DomainError("distance must be >= 0");
    IntensityConfig cfg;
    cfg.gamma_w = settings.gamma_w;
    ChannelParams chan = settings.channel;
    chan.distance = distance;
    LeakageModel model;
    model.leak_case = leak_case;
    model.i_max = i_max;
    model.p_cut = settings.p_cut;
    model.validate();
    PmLeakage pm;
    pm.enabled = settings.pm_enabled;
    pm.i_max_pm = i_max;

    long evaluations = 0;
    long infeasible = 0;
    bool any_single_photon = false;
    const auto objective = [&](double gs, double gv, double tv, double tw) {
        IntensityConfig c = cfg;
        c.gamma_s = gs;
        c.gamma_v = gv;
        LeakageModel mm = model;
        mm.theta_v = tv;
        mm.theta_w = tw;
        const PointEvaluation e =
            evaluate_point(c, mm, chan, settings.estimator, settings.protocol, pm);
        ++evaluations;
        if (e.infeasible) ++infeasible;
        if (e.bounds.y1_l > 0.0) any_single_photon = true;
        return e.raw_rate;
    };
    const bool eve_phases = leak_case != LeakageCase::PhaseRandomized && i_max > 0.0;
    const SearchPoint best = maximin_search(objective, settings.grid, cfg.gamma_w, eve_phases);

    cfg.gamma_s = best.gamma_s;
    cfg.gamma_v = best.gamma_v;
    model.theta_v = best.theta_v;
    model.theta_w = best.theta_w;
    const PointEvaluation e =
        evaluate_point(cfg, model, chan, settings.estimator, settings.protocol, pm);

    OptimalPoint out;
    out.rate = e.rate;
    out.raw_rate = e.raw_rate;
    out.gamma_s = best.gamma_s;
    out.gamma_v = best.gamma_v;
    out.theta_v = best.theta_v;
    out.theta_w = best.theta_w;
    out.bounds = e.bounds;
    out.phase_err = e.phase_err;
    if (e.rate > 0.0) {
        out.status = RateStatus::Ok;
    } else if (evaluations > 0 && infeasible == evaluations) {
        out.status = RateStatus::LpInfeasible;
    } else if (!any_single_photon) {
        out.status = RateStatus::GridAllZero;
    } else {
        out.status = RateStatus::ZeroRate;
    }
    return out;
}

double cutoff_distance(const std::function<double(double)>& rate_at, double lo, double hi,
                       double tol) {
    if (!(lo <= hi) || !(tol > 0.0)) throw DomainError("cutoff search needs lo <= hi, tol > 0");
    if (!(rate_at(lo) > 0.0)) return lo;
    if (rate_at(hi) > 0.0) return hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (rate_at(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

}  // namespace leakqkd
