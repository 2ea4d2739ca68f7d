#pragma once

#include <limits>
#include <string>
#include <vector>

namespace leakqkd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// lower <= coeffs . x <= upper; either side may be infinite.
struct LPRow {
    std::vector<double> coeffs;
    double lower = -kInf;
    double upper = kInf;
    std::string label;
};

/// minimize objective . x subject to rows and var_lower <= x <= var_upper.
struct LPProblem {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<LPRow> rows;
    std::vector<double> var_lower;
    std::vector<double> var_upper;

    /// Throws DomainError on mismatched dimensions, NaNs or crossed bounds.
    void validate() const;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPSolution {
    LPStatus status = LPStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    int pivots = 0;
};

/// Dense two-phase simplex on the dual. The primal is turned into a list of one-sided
/// inequalities G x <= h over free x, and the simplex runs on min h.y s.t. G^T y = -c,
/// y >= 0, which has only num_vars equality rows. Dantzig pricing falls back to Bland's
/// rule on degenerate stalls. The primal point is read back from the simplex multipliers
/// and checked against every row before it is returned. A failed double-precision run is
/// repeated in long double.
LPSolution solve_lp(const LPProblem& problem, double tolerance = 1e-9);

const char* to_string(LPStatus status) noexcept;

}  // namespace leakqkd
