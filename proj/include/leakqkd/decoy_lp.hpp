#pragma once

#include <array>

#include "leakqkd/leakage.hpp"
#include "leakqkd/lp_solver.hpp"

namespace leakqkd {

enum class Basis { Z, X };

struct SettingStats {
    double gain = 0.0;  // Q
    double qber = 0.0;  // E
};

/// Gains and error rates per setting (indexed by Setting) for the two bases.
struct ObservedStats {
    std::array<SettingStats, 3> z{};
    std::array<SettingStats, 3> x{};

    const std::array<SettingStats, 3>& basis(Basis b) const noexcept { return b == Basis::Z ? z : x; }
    const SettingStats& at(Basis b, Setting s) const noexcept {
        return basis(b)[static_cast<int>(s)];
    }
    void validate() const;
};

struct EstimatorConfig {
    int s_cut = 10;
    double lp_tolerance = 1e-9;

    void validate() const;
};

enum class Objective { Y0, Y1, Omega1 };

struct DecoyBounds {
    double y0_l = 0.0;
    double y1_l = 0.0;    // Z basis
    double y1_l_x = 0.0;  // X basis, the denominator of e1_u
    double e1_u = 1.0;
    bool infeasible = false;
};

/// Poisson probability mass above s_cut.
double gamma_tail(double gamma, int s_cut);

/// Variable layout of the LPs: Y_0..Y_{s_cut}, then the two shifts.
inline int delta_ws_index(int s_cut) { return s_cut + 1; }
inline int delta_vw_index(int s_cut) { return s_cut + 2; }

/// Decoy LP for one basis. For Omega1 the gains are replaced by Q*E, the yield variables
/// stand for Y_n e_n, and the objective is -omega_1.
LPProblem build_lp(Objective objective, const std::array<SettingStats, 3>& stats,
                   const LeakageDistances& dist, const IntensityConfig& cfg,
                   const EstimatorConfig& est);

/// Y0L and Y1L from the Z-basis LPs; e1U from the X-basis Omega1 LP divided by the
/// X-basis Y1L. An infeasible LP leaves the vacuous values and sets `infeasible`.
DecoyBounds estimate_bounds(const ObservedStats& stats, const LeakageDistances& dist,
                            const IntensityConfig& cfg, const EstimatorConfig& est);

}  // namespace leakqkd
