#pragma once

#include "leakqkd/decoy_lp.hpp"
#include "leakqkd/leakage.hpp"

namespace leakqkd {

/// Fiber link and threshold-detector receiver. Defaults are the standard simulation values.
struct ChannelParams {
    double alpha = 0.2;     // dB/km
    double distance = 0.0;  // km
    double eta_b = 0.5;
    double eta_det = 0.25;
    double p_d = 5e-6;
    double e_d = 0.01;

    void validate() const;
};

/// eta_sys = 10^{-alpha d / 10} eta_B eta_det
double transmittance(const ChannelParams& params);

/// Gain and QBER of every setting; both bases receive the same values.
ObservedStats simulate_observations(const ChannelParams& params, const IntensityConfig& cfg);

/// The same closed forms for a single intensity.
SettingStats simulate_setting(const ChannelParams& params, double gamma);

}  // namespace leakqkd
