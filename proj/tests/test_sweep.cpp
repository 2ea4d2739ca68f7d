#include <sstream>
#include <string>

#include "doctest.h"
#include "leakqkd/errors.hpp"
#include "leakqkd/sweep.hpp"

using namespace leakqkd;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

SweepConfig small_sweep() {
    SweepConfig c = parse_config(
        "case = 2\n"
        "i_max = [1e-7, 1e-9]\n"
        "d_min = 0\nd_max = 40\nd_step = 20\n"
        "grid.gamma_s_points = 4\ngrid.gamma_v_points = 3\ngrid.theta_points = 4\ngrid.refine = 1\n");
    return c;
}

}  // namespace

TEST_CASE("minimal config takes the simulation defaults") {
    const SweepConfig c = parse_config("case = 1\ni_max = [1e-6]\n");
    CHECK(c.leak_case == LeakageCase::FixedCoherent);
    REQUIRE(c.i_max.size() == 1);
    CHECK(c.i_max[0] == 1e-6);
    const EngineSettings& e = c.engine;
    CHECK(e.channel.alpha == 0.2);
    CHECK(e.channel.eta_b == 0.5);
    CHECK(e.channel.eta_det == 0.25);
    CHECK(e.channel.p_d == 5e-6);
    CHECK(e.channel.e_d == 0.01);
    CHECK(e.protocol.f_ec == 1.2);
    CHECK(e.protocol.q_eff == 1.0);
    CHECK(e.gamma_w == 5e-4);
    CHECK(e.estimator.s_cut == 10);
    CHECK_FALSE(e.pm_enabled);
    CHECK(c.format == OutputFormat::Csv);
}

TEST_CASE("syntax: comments, quoting, bare lists") {
    const SweepConfig c = parse_config(
        "# leading comment\n"
        "case = 3   # trailing\n"
        "i_max = 1e-3, 1e-2\n"
        "pm_enabled = true\n"
        "output.path = \"out # not a comment.csv\"\n"
        "output.format = jsonl\n");
    CHECK(c.leak_case == LeakageCase::PhaseRandomized);
    CHECK(c.i_max == std::vector<double>{1e-3, 1e-2});
    CHECK(c.engine.pm_enabled);
    CHECK(c.output_path == "out # not a comment.csv");
    CHECK(c.format == OutputFormat::JsonLines);
}

TEST_CASE("config errors") {
    const std::string unknown = error_of("case = 1\nalfa = 0.2\n");
    CHECK(contains(unknown, "line 2"));
    CHECK(contains(unknown, "alfa"));
    CHECK(contains(unknown, "alpha"));  // the valid keys are listed
    CHECK(contains(unknown, "grid.refine"));

    const std::string dup = error_of("case = 1\ncase = 2\n");
    CHECK(contains(dup, "duplicate"));
    CHECK(contains(dup, "line 2"));

    const std::string type = error_of("d_max = far\n");
    CHECK(contains(type, "d_max"));
    CHECK(contains(type, "number"));

    CHECK(contains(error_of("s_cut = 3.5\n"), "integer"));
    CHECK(contains(error_of("pm_enabled = 1\n"), "true or false"));
    CHECK(contains(error_of("alpha = -1\n"), "alpha"));
    CHECK(contains(error_of("i_max = [1e-3, -1]\n"), "i_max"));
    CHECK(contains(error_of("d_step = 0\n"), "d_step"));
    CHECK(contains(error_of("case = 4\n"), "case"));
    CHECK(contains(error_of("case = 3\ni_max = [0.9]\n"), "ln 2"));
    CHECK(contains(error_of("output.format = xml\n"), "output.format"));
    CHECK(contains(error_of("just text\n"), "line 1"));
    CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("serialize and reload is the identity") {
    SweepConfig c = parse_config("case = 2\ni_max = [1e-12, 3.3e-7, 0.1]\npm_enabled = true\n");
    c.engine.channel.alpha = 0.21;
    c.engine.channel.p_d = 1.0 / 3.0 * 1e-5;
    c.engine.grid.refine = 5;
    c.d_step = 0.1;
    c.output_path = "runs/a b.csv";
    c.format = OutputFormat::JsonLines;
    const std::string text = serialize_config(c);
    const SweepConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);
    CHECK(parse_config(serialize_config(SweepConfig{})) == SweepConfig{});
}

TEST_CASE("distance grid") {
    SweepConfig c;
    c.d_min = 0.0;
    c.d_max = 1.0;
    c.d_step = 0.1;
    const auto d = sweep_distances(c);
    REQUIRE(d.size() == 11);
    CHECK(d.back() == doctest::Approx(1.0));
    c.d_min = 5.0;
    c.d_max = 4.0;
    CHECK(sweep_distances(c).empty());
}

TEST_CASE("empty range gives a header-only table") {
    SweepConfig c;
    c.d_min = 10.0;
    c.d_max = 0.0;
    const auto rows = run_sweep(c);
    CHECK(rows.empty());
    std::ostringstream csv;
    write_csv(csv, rows);
    CHECK(csv.str() ==
          "distance_km,i_max,case,pm_enabled,key_rate,gamma_s_opt,gamma_v_opt,theta_v_opt,"
          "theta_w_opt,y0_l,y1_l,e1_u,phase_err,status\n");
    std::ostringstream jl;
    write_jsonl(jl, rows);
    CHECK(jl.str().empty());
}

TEST_CASE("rows are ordered and output is deterministic") {
    const SweepConfig c = small_sweep();
    const auto a = run_sweep(c);
    REQUIRE(a.size() == 6);
    CHECK(a[0].i_max == 1e-9);
    CHECK(a[3].i_max == 1e-7);
    for (std::size_t i = 1; i < a.size(); ++i) {
        CHECK((a[i].i_max > a[i - 1].i_max ||
               (a[i].i_max == a[i - 1].i_max && a[i].distance > a[i - 1].distance)));
    }
    std::ostringstream x, y;
    write_csv(x, a);
    write_csv(y, run_sweep(c));
    CHECK(x.str() == y.str());

    // ten significant digits in scientific notation, status last
    const std::string first = x.str().substr(x.str().find('\n') + 1);
    CHECK(first.rfind("0.000000000e+00,1.000000000e-09,2,0,", 0) == 0);
    CHECK(contains(first.substr(0, first.find('\n')), ",ok"));

    std::ostringstream j;
    write_jsonl(j, a);
    const std::string line = j.str().substr(0, j.str().find('\n'));
    CHECK(contains(line, "\"distance_km\":0.0"));
    CHECK(contains(line, "\"pm_enabled\":false"));
    CHECK(contains(line, "\"status\":\"ok\""));
}

TEST_CASE("progress callback sees every row") {
    const SweepConfig c = small_sweep();
    int calls = 0;
    run_sweep(c, [&](const SweepRow&) { ++calls; });
    CHECK(calls == 6);
}
