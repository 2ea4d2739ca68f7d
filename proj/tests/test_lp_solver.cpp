#include <cmath>
#include <random>

#include "doctest.h"
#include "leakqkd/channel.hpp"
#include "leakqkd/decoy_lp.hpp"
#include "leakqkd/errors.hpp"
#include "leakqkd/lp_solver.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace leakqkd;

namespace {

LPProblem boxed(int n) {
    LPProblem p;
    p.num_vars = n;
    p.objective.assign(n, 0.0);
    p.var_lower.assign(n, 0.0);
    p.var_upper.assign(n, 1.0);
    return p;
}

LPRow row(std::vector<double> c, double lo, double hi) {
    LPRow r;
    r.coeffs = std::move(c);
    r.lower = lo;
    r.upper = hi;
    return r;
}

}  // namespace

TEST_CASE("tiny LPs") {
    LPProblem p = boxed(1);
    p.objective = {1.0};
    LPSolution s = solve_lp(p);
    REQUIRE(s.status == LPStatus::Optimal);
    CHECK(s.objective == doctest::Approx(0.0).scale(1.0));

    p = boxed(2);
    p.objective = {1.0, 1.0};
    p.rows.push_back(row({1.0, 1.0}, 0.3, kInf));
    s = solve_lp(p);
    REQUIRE(s.status == LPStatus::Optimal);
    CHECK(s.objective == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(s.x[0] + s.x[1] == doctest::Approx(0.3).epsilon(1e-12));

    // maximise via a negative objective
    p.objective = {-2.0, -1.0};
    p.rows[0] = row({1.0, 1.0}, -kInf, 1.5);
    s = solve_lp(p);
    REQUIRE(s.status == LPStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-2.5).epsilon(1e-12));
}

TEST_CASE("infeasible and unbounded") {
    LPProblem p = boxed(2);
    p.rows.push_back(row({1.0, 1.0}, 2.5, kInf));
    CHECK(solve_lp(p).status == LPStatus::Infeasible);

    LPProblem q;
    q.num_vars = 1;
    q.objective = {-1.0};
    q.var_lower = {0.0};
    q.var_upper = {kInf};
    CHECK(solve_lp(q).status == LPStatus::Unbounded);
}

TEST_CASE("malformed problems are rejected") {
    LPProblem p = boxed(2);
    p.objective = {1.0};
    CHECK_THROWS_AS(solve_lp(p), DomainError);
    p = boxed(2);
    p.var_lower[1] = 2.0;
    CHECK_THROWS_AS(solve_lp(p), DomainError);
    p = boxed(2);
    p.rows.push_back(row({1.0, std::nan("")}, 0.0, 1.0));
    CHECK_THROWS_AS(solve_lp(p), DomainError);
}

TEST_CASE("random small LPs agree with vertex enumeration") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int compared = 0;
    for (int t = 0; t < 300; ++t) {
        const int n = 2 + t % 3;
        LPProblem p = boxed(n);
        for (int i = 0; i < n; ++i) {
            p.objective[i] = u(rng);
            p.var_lower[i] = -1.0 + 0.5 * u(rng);
            p.var_upper[i] = 1.0 + 0.5 * u(rng);
        }
        const int m = 1 + t % 4;
        for (int r = 0; r < m; ++r) {
            std::vector<double> c(n);
            for (double& v : c) v = u(rng);
            const double lo = u(rng) < 0.0 ? -kInf : 0.5 * u(rng) - 0.5;
            const double hi = lo == -kInf ? 0.5 + 0.5 * u(rng) : (u(rng) < 0.0 ? kInf : lo + 1.0);
            p.rows.push_back(row(c, lo, hi));
        }
        const auto ref = oracle::vertex_enumeration_lp(p);
        const LPSolution s = solve_lp(p);
        if (!ref) {
            CHECK(s.status == LPStatus::Infeasible);
            continue;
        }
        REQUIRE(s.status == LPStatus::Optimal);
        CHECK(s.objective == doctest::Approx(*ref).epsilon(1e-9).scale(1.0));
        ++compared;
    }
    CHECK(compared > 200);
}

TEST_CASE("degenerate LP does not cycle") {
    // Beale's example, which cycles under textbook Dantzig pricing.
    LPProblem p;
    p.num_vars = 4;
    p.objective = {-0.75, 150.0, -0.02, 6.0};
    p.var_lower.assign(4, 0.0);
    p.var_upper.assign(4, kInf);
    p.rows.push_back(row({0.25, -60.0, -0.04, 9.0}, -kInf, 0.0));
    p.rows.push_back(row({0.5, -90.0, -0.02, 3.0}, -kInf, 0.0));
    p.rows.push_back(row({0.0, 0.0, 1.0, 0.0}, -kInf, 1.0));
    const LPSolution s = solve_lp(p);
    REQUIRE(s.status == LPStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-0.05).epsilon(1e-12));
}

TEST_CASE("decoy LPs agree with the primal simplex oracle") {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 40; ++t) {
        const oracle::SyntheticInstance inst = oracle::synthesize_instance(rng, 10);
        EstimatorConfig est;
        for (Objective o : {Objective::Y0, Objective::Y1, Objective::Omega1}) {
            const LPProblem lp = build_lp(o, inst.stats.z, inst.dist, inst.cfg, est);
            const LPSolution s = solve_lp(lp, est.lp_tolerance);
            const auto ref = oracle::primal_simplex_lp(lp);
            REQUIRE(ref.has_value());
            REQUIRE(s.status == LPStatus::Optimal);
            CHECK(std::abs(s.objective - *ref) <= 1e-9);
        }
    }
}

TEST_CASE("solutions are deterministic") {
    std::mt19937_64 rng(3);
    const oracle::SyntheticInstance inst = oracle::synthesize_instance(rng, 10);
    const LPProblem lp = build_lp(Objective::Y1, inst.stats.z, inst.dist, inst.cfg, EstimatorConfig{});
    const LPSolution a = solve_lp(lp);
    const LPSolution b = solve_lp(lp);
    CHECK(a.objective == b.objective);
    CHECK(a.x == b.x);
    CHECK(a.pivots == b.pivots);
}
