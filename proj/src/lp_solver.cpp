#include "leakqkd/lp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Dense>

#include "leakqkd/errors.hpp"

namespace leakqkd {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr int kMaxPivots = 100000;
constexpr double kHarrisSlack = 1e-12;
// Consecutive non-improving pivots after which entering columns follow Bland's rule.
constexpr int kBlandAfter = 20;
constexpr int kRefactorEvery = 25;
constexpr int kMaxRounds = 8;

// Rescale variables so every column's largest row coefficient is 1; x_scaled = s x.
// Yields of high photon numbers otherwise enter only through Poisson weights many orders
// of magnitude below their unit box, which starves the simplex of usable pivots.
LPProblem equilibrate(const LPProblem& p, std::vector<double>& scale) {
    LPProblem q = p;
    scale.assign(p.num_vars, 1.0);
    for (int i = 0; i < p.num_vars; ++i) {
        double s = 0.0;
        for (const LPRow& row : p.rows) s = std::max(s, std::abs(row.coeffs[i]));
        if (s > 0.0) scale[i] = s;
    }
    for (LPRow& row : q.rows) {
        for (int i = 0; i < p.num_vars; ++i) row.coeffs[i] /= scale[i];
    }
    for (int i = 0; i < p.num_vars; ++i) {
        q.objective[i] /= scale[i];
        q.var_lower[i] *= scale[i];
        q.var_upper[i] *= scale[i];
    }
    return q;
}

// G x <= h, one dense row per finite bound, each normalised to unit max-norm.
struct OneSided {
    std::vector<std::vector<double>> g;
    std::vector<double> h;
};

OneSided one_sided(const LPProblem& p) {
    OneSided out;
    const auto push = [&](const std::vector<double>& row, double sign, double rhs) {
        double norm = 0.0;
        for (double a : row) norm = std::max(norm, std::abs(a));
        if (norm == 0.0) norm = 1.0;
        std::vector<double> r(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) r[i] = sign * row[i] / norm;
        out.g.push_back(std::move(r));
        out.h.push_back(sign * rhs / norm);
    };
    for (const LPRow& row : p.rows) {
        if (std::isfinite(row.upper)) push(row.coeffs, 1.0, row.upper);
        if (std::isfinite(row.lower)) push(row.coeffs, -1.0, row.lower);
    }
    std::vector<double> unit(p.num_vars, 0.0);
    for (int i = 0; i < p.num_vars; ++i) {
        unit[i] = 1.0;
        if (std::isfinite(p.var_upper[i])) push(unit, 1.0, p.var_upper[i]);
        if (std::isfinite(p.var_lower[i])) push(unit, -1.0, p.var_lower[i]);
        unit[i] = 0.0;
    }
    return out;
}

enum class Phase { Optimal, Unbounded };

// Simplex tableau for  A y = b, y >= 0  with one artificial column per row. Real is double
// on the first attempt and long double on the retry.
template <class Real>
class Tableau {
    using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

public:
    Tableau(const OneSided& ineq, const std::vector<double>& rhs)
        : m_(static_cast<int>(rhs.size())),
          k_(static_cast<int>(ineq.h.size())),
          width_(k_ + m_ + 1),
          t_(static_cast<std::size_t>(m_) * width_, 0.0),
          z_(width_, 0.0),
          basis_(m_),
          sign_(m_),
          barred_(k_ + m_, false) {
        original_.resize(m_, width_);
        for (int i = 0; i < m_; ++i) {
            sign_[i] = rhs[i] < 0.0 ? -1.0 : 1.0;
            for (int j = 0; j < k_; ++j) at(i, j) = sign_[i] * ineq.g[j][i];
            at(i, k_ + i) = 1.0;
            at(i, width_ - 1) = sign_[i] * rhs[i];
            basis_[i] = k_ + i;
        }
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < width_; ++j) original_(i, j) = at(i, j);
        }
    }

    // Rebuild the tableau as B^{-1} [A | I | b] from the original data, discarding the
    // round-off accumulated by the pivots, and price it out again.
    void refactor() {
        RealMatrix b(m_, m_);
        for (int i = 0; i < m_; ++i) b.col(i) = original_.col(basis_[i]);
        const Eigen::FullPivLU<RealMatrix> lu(b);
        if (!lu.isInvertible()) {
            throw NumericalError("simplex basis became singular");
        }
        const RealMatrix fresh = lu.solve(original_);
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < width_; ++j) at(i, j) = fresh(i, j);
        }
        for (int i = 0; i < m_; ++i) {
            for (int r = 0; r < m_; ++r) at(r, basis_[i]) = r == i ? 1.0 : 0.0;
        }
        reprice();
        since_refactor_ = 0;
    }

    bool optimal() const {
        for (int j = 0; j < width_ - 1; ++j) {
            if (!barred_[j] && z_[j] < -dj_tol_) return false;
        }
        return true;
    }

    // Simplex iterations, re-factoring periodically and once more at the end so that
    // optimality is judged on a clean tableau.
    Phase solve() {
        for (int round = 0; round < kMaxRounds; ++round) {
            if (run() == Phase::Unbounded) return Phase::Unbounded;
            if (since_refactor_ == 0) return Phase::Optimal;
            refactor();
            if (optimal()) return Phase::Optimal;
        }
        throw NumericalError("simplex did not settle after repeated re-factoring");
    }

    int pivots() const noexcept { return pivots_; }

    // Start from the box-bound rows where they exist: a unit column matching the sign of
    // row i is a feasible basic column, which usually leaves phase 1 nothing to do.
    void crash() {
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < k_; ++j) {
                if (at(i, j) != 1.0) continue;
                bool unit = true;
                for (int r = 0; r < m_ && unit; ++r) unit = r == i || at(r, j) == 0.0;
                if (!unit) continue;
                pivot(i, j);
                break;
            }
        }
        // Unit-column pivots are exact.
        since_refactor_ = 0;
    }

    // Load a cost vector over all k + m columns and price out the basis.
    void set_costs(const std::vector<double>& cost) {
        cost_.assign(cost.begin(), cost.end());
        double scale = 1.0;
        for (double c : cost) scale = std::max(scale, std::abs(c));
        dj_tol_ = 1e-11 * scale;
        reprice();
    }

    double objective() const noexcept { return static_cast<double>(-z_[width_ - 1]); }

    // Reduced costs of the current basis under cost_.
    void reprice() {
        for (int j = 0; j < width_ - 1; ++j) z_[j] = cost_[j];
        z_[width_ - 1] = 0.0;
        for (int i = 0; i < m_; ++i) {
            const Real cb = cost_[basis_[i]];
            if (cb == 0.0) continue;
            for (int j = 0; j < width_; ++j) z_[j] -= cb * at(i, j);
        }
    }

    Phase run() {
        int degenerate_streak = 0;
        while (true) {
            const bool bland = degenerate_streak >= kBlandAfter;
            int enter = -1;
            Real most_negative = -dj_tol_;
            for (int j = 0; j < width_ - 1; ++j) {
                if (barred_[j] || z_[j] >= -dj_tol_) continue;
                if (bland) {
                    enter = j;
                    break;
                }
                if (z_[j] < most_negative) {
                    most_negative = z_[j];
                    enter = j;
                }
            }
            if (enter < 0) return Phase::Optimal;

            // Harris two-pass ratio test: the largest step any row allows once a small
            // infeasibility is tolerated, then the largest pivot among rows within it.
            Real step_cap = kInf;
            for (int i = 0; i < m_; ++i) {
                const Real a = at(i, enter);
                if (a > kPivotTol) step_cap = std::min(step_cap, (rhs(i) + kHarrisSlack) / a);
            }
            if (!std::isfinite(step_cap)) return Phase::Unbounded;
            int leave = -1;
            for (int i = 0; i < m_; ++i) {
                const Real a = at(i, enter);
                if (a <= kPivotTol || rhs(i) / a > step_cap) continue;
                if (leave < 0 || a > at(leave, enter) ||
                    (a == at(leave, enter) && basis_[i] < basis_[leave])) {
                    leave = i;
                }
            }
            const double before = objective();
            pivot(leave, enter);
            if (++since_refactor_ >= kRefactorEvery) refactor();
            degenerate_streak = objective() < before - 1e-15 * std::max(1.0, std::abs(before))
                                    ? 0
                                    : degenerate_streak + 1;
        }
    }

    // After phase 1: move artificials that linger at zero level out of the basis where
    // possible, and forbid every artificial from re-entering.
    void expel_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < k_) continue;
            int col = -1;
            Real best = 1e-9;
            for (int j = 0; j < k_; ++j) {
                if (std::abs(at(i, j)) > best) {
                    best = std::abs(at(i, j));
                    col = j;
                }
            }
            if (col >= 0) {
                pivot(i, col);
                ++since_refactor_;
            }
        }
        for (int j = k_; j < k_ + m_; ++j) barred_[j] = true;
    }

    // Simplex multipliers of the original (unflipped) equality rows.
    std::vector<double> multipliers() const {
        std::vector<double> pi(m_);
        for (int i = 0; i < m_; ++i) pi[i] = static_cast<double>(-sign_[i] * z_[k_ + i]);
        return pi;
    }

private:
    Real& at(int i, int j) { return t_[static_cast<std::size_t>(i) * width_ + j]; }
    Real rhs(int i) const { return at(i, width_ - 1); }
    Real at(int i, int j) const { return t_[static_cast<std::size_t>(i) * width_ + j]; }

    void pivot(int row, int col) {
        if (++pivots_ > kMaxPivots) {
            throw NumericalError("simplex exceeded the pivot limit");
        }
        const Real inv = Real(1) / at(row, col);
        for (int j = 0; j < width_; ++j) at(row, j) *= inv;
        at(row, col) = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == row) continue;
            const Real f = at(i, col);
            if (f == 0.0) continue;
            for (int j = 0; j < width_; ++j) at(i, j) -= f * at(row, j);
            at(i, col) = 0.0;
        }
        const Real f = z_[col];
        if (f != 0.0) {
            for (int j = 0; j < width_; ++j) z_[j] -= f * at(row, j);
            z_[col] = 0.0;
        }
        basis_[row] = col;
    }

    int m_;
    int k_;
    int width_;
    std::vector<Real> t_;
    std::vector<Real> z_;
    std::vector<int> basis_;
    std::vector<double> sign_;
    std::vector<bool> barred_;
    std::vector<Real> cost_;
    Real dj_tol_ = 1e-11;
    int pivots_ = 0;
    int since_refactor_ = 0;
    RealMatrix original_;
};

enum class DualOutcome { Optimal, DualInfeasible, DualUnbounded };

struct DualResult {
    DualOutcome outcome;
    std::vector<double> x;
    double dual_objective = 0.0;
    int pivots = 0;
};

template <class Real>
DualResult solve_dual(const OneSided& ineq, const std::vector<double>& c, double tol) {
    const int m = static_cast<int>(c.size());
    const int k = static_cast<int>(ineq.h.size());
    std::vector<double> rhs(m);
    double rhs_scale = 1.0;
    for (int i = 0; i < m; ++i) {
        rhs[i] = -c[i];
        rhs_scale = std::max(rhs_scale, std::abs(rhs[i]));
    }
    Tableau<Real> tab(ineq, rhs);
    tab.crash();

    std::vector<double> cost(k + m, 0.0);
    for (int i = 0; i < m; ++i) cost[k + i] = 1.0;
    tab.set_costs(cost);
    tab.solve();
    if (tab.objective() > tol * rhs_scale) {
        return {DualOutcome::DualInfeasible, {}, 0.0, tab.pivots()};
    }
    tab.expel_artificials();

    std::fill(cost.begin(), cost.end(), 0.0);
    for (int j = 0; j < k; ++j) cost[j] = ineq.h[j];
    tab.set_costs(cost);
    if (tab.solve() == Phase::Unbounded) {
        return {DualOutcome::DualUnbounded, {}, 0.0, tab.pivots()};
    }
    return {DualOutcome::Optimal, tab.multipliers(), tab.objective(), tab.pivots()};
}

}  // namespace

void LPProblem::validate() const {
    const auto n = static_cast<std::size_t>(num_vars);
    if (num_vars < 1) throw DomainError("LP needs at least one variable");
    if (objective.size() != n || var_lower.size() != n || var_upper.size() != n) {
        throw DomainError("LP objective and bounds must have one entry per variable");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(objective[i]) || std::isnan(var_lower[i]) || std::isnan(var_upper[i])) {
            throw DomainError("LP data contains NaN");
        }
        if (var_lower[i] > var_upper[i]) {
            throw DomainError("LP variable " + std::to_string(i) + " has crossed bounds");
        }
    }
    for (const LPRow& row : rows) {
        if (row.coeffs.size() != n) {
            throw DomainError("LP row '" + row.label + "' has the wrong length");
        }
        for (double a : row.coeffs) {
            if (!std::isfinite(a)) throw DomainError("LP row '" + row.label + "' is not finite");
        }
        if (std::isnan(row.lower) || std::isnan(row.upper)) {
            throw DomainError("LP row '" + row.label + "' has a NaN bound");
        }
    }
}

namespace {

template <class Real>
LPSolution solve_with(const LPProblem& problem, const LPProblem& scaled,
                      const std::vector<double>& scale, const OneSided& ineq, double tolerance) {
    DualResult dual = solve_dual<Real>(ineq, scaled.objective, tolerance);

    LPSolution sol;
    sol.pivots = dual.pivots;
    if (dual.outcome == DualOutcome::DualUnbounded) {
        sol.status = LPStatus::Infeasible;
        return sol;
    }
    if (dual.outcome == DualOutcome::DualInfeasible) {
        // Primal is infeasible or unbounded; a zero objective tells them apart.
        const std::vector<double> zero(problem.num_vars, 0.0);
        const DualResult probe = solve_dual<Real>(ineq, zero, tolerance);
        sol.pivots += probe.pivots;
        sol.status = probe.outcome == DualOutcome::Optimal ? LPStatus::Unbounded
                                                           : LPStatus::Infeasible;
        return sol;
    }

    const std::vector<double>& xs = dual.x;
    for (std::size_t r = 0; r < ineq.h.size(); ++r) {
        double lhs = 0.0;
        double mag = 1.0 + std::abs(ineq.h[r]);
        for (int i = 0; i < problem.num_vars; ++i) {
            lhs += ineq.g[r][i] * xs[i];
            mag += std::abs(ineq.g[r][i] * xs[i]);
        }
        if (lhs - ineq.h[r] > tolerance * mag) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "recovered LP point violates inequality %zu by %.3e (scale %.3e)", r,
                          lhs - ineq.h[r], mag);
            throw NumericalError(buf);
        }
    }
    double obj_scaled = 0.0;
    for (int i = 0; i < problem.num_vars; ++i) obj_scaled += scaled.objective[i] * xs[i];
    const double gap = std::abs(obj_scaled + dual.dual_objective);
    if (gap > tolerance * (1.0 + std::abs(obj_scaled))) {
        throw NumericalError("LP duality gap " + std::to_string(gap) + " exceeds tolerance");
    }

    // Undo the scaling and clip the round-off the checks above tolerated.
    sol.x.resize(problem.num_vars);
    double obj = 0.0;
    for (int i = 0; i < problem.num_vars; ++i) {
        sol.x[i] = std::clamp(xs[i] / scale[i], problem.var_lower[i], problem.var_upper[i]);
        obj += problem.objective[i] * sol.x[i];
    }
    sol.objective = obj;
    sol.status = LPStatus::Optimal;
    return sol;
}

}  // namespace

LPSolution solve_lp(const LPProblem& problem, double tolerance) {
    problem.validate();
    if (!(tolerance > 0.0)) throw DomainError("LP tolerance must be positive");

    std::vector<double> scale;
    const LPProblem scaled = equilibrate(problem, scale);
    const OneSided ineq = one_sided(scaled);
    try {
        return solve_with<double>(problem, scaled, scale, ineq, tolerance);
    } catch (const NumericalError&) {
        // The yield columns of high photon numbers are nearly parallel; when double
        // precision loses the basis to pivot growth, extended precision usually does not.
        return solve_with<long double>(problem, scaled, scale, ineq, tolerance);
    }
}

const char* to_string(LPStatus status) noexcept {
    switch (status) {
        case LPStatus::Optimal: return "optimal";
        case LPStatus::Infeasible: return "infeasible";
        case LPStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

}  // namespace leakqkd
