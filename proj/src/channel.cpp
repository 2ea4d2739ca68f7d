#include "leakqkd/channel.hpp"

#include <cmath>

#include "leakqkd/errors.hpp"

namespace leakqkd {

namespace {

bool unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void ChannelParams::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be >= 0");
    if (!(distance >= 0.0)) throw DomainError("distance must be >= 0");
    if (!unit_interval(eta_b)) throw DomainError("eta_b must lie in [0,1]");
    if (!unit_interval(eta_det)) throw DomainError("eta_det must lie in [0,1]");
    if (!unit_interval(p_d)) throw DomainError("p_d must lie in [0,1]");
    if (!unit_interval(e_d)) throw DomainError("e_d must lie in [0,1]");
}

double transmittance(const ChannelParams& params) {
    params.validate();
    if (std::isinf(params.distance)) return 0.0;
    return std::pow(10.0, -params.alpha * params.distance / 10.0) * params.eta_b * params.eta_det;
}

SettingStats simulate_setting(const ChannelParams& params, double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw DomainError("intensity must be finite and non-negative");
    }
    const double x = gamma * transmittance(params);
    const double dark_free = 1.0 - params.p_d;
    // 1 - (1-p_d)^2 e^{-x}, written so that tiny x and p_d keep their digits.
    const double gain = -std::expm1(2.0 * std::log1p(-params.p_d) - x);
    SettingStats s;
    s.gain = gain;
    if (gain <= 0.0) {
        s.qber = 0.5;
        return s;
    }
    // e^{-x(1-e_d)} - e^{-x e_d} = e^{-x e_d} (e^{-x(1-2e_d)} - 1)
    const double diff = std::exp(-x * params.e_d) * std::expm1(-x * (1.0 - 2.0 * params.e_d));
    s.qber = 0.5 + dark_free * diff / (2.0 * gain);
    return s;
}

ObservedStats simulate_observations(const ChannelParams& params, const IntensityConfig& cfg) {
    params.validate();
    cfg.validate();
    ObservedStats out;
    for (Setting s : {Setting::Signal, Setting::Decoy, Setting::Weak}) {
        const SettingStats v = simulate_setting(params, cfg.gamma(s));
        out.z[static_cast<int>(s)] = v;
        out.x[static_cast<int>(s)] = v;
    }
    return out;
}

}  // namespace leakqkd
