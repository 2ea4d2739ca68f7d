// Distance x leakage-intensity sweeps of the finite-decoy key rate.
//
//   sweep --config run.cfg [--case N] [--imax v1,v2] [--pm] [--dmin K --dmax K --dstep K]
//         [--out PATH] [--format csv|jsonl]
//
// Exit status: 0 success, 1 configuration error, 2 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "leakqkd/errors.hpp"
#include "leakqkd/sweep.hpp"

namespace {

// Flags only override what they were given; everything else comes from the file.
struct Overrides {
    std::optional<int> leak_case;
    std::vector<double> i_max;
    bool pm = false;
    std::optional<double> d_min, d_max, d_step;
    std::optional<std::string> out;
    std::optional<std::string> format;
};

leakqkd::SweepConfig build_config(const std::string& path, const Overrides& o) {
    using namespace leakqkd;
    SweepConfig cfg = path.empty() ? SweepConfig{} : load_config(path);
    if (o.leak_case) {
        if (*o.leak_case < 1 || *o.leak_case > 3) throw ConfigError("--case must be 1, 2 or 3");
        cfg.leak_case = static_cast<LeakageCase>(*o.leak_case);
    }
    if (!o.i_max.empty()) cfg.i_max = o.i_max;
    if (o.pm) cfg.engine.pm_enabled = true;
    if (o.d_min) cfg.d_min = *o.d_min;
    if (o.d_max) cfg.d_max = *o.d_max;
    if (o.d_step) cfg.d_step = *o.d_step;
    if (o.out) cfg.output_path = *o.out;
    if (o.format) cfg.format = *o.format == "csv" ? OutputFormat::Csv : OutputFormat::JsonLines;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Key rate versus distance under Trojan-horse leakage"};
    std::string config_path;
    Overrides o;
    bool quiet = false;
    app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--case", o.leak_case, "leakage case (1, 2 or 3)");
    app.add_option("--imax", o.i_max, "leaked intensities, comma separated")->delimiter(',');
    app.add_flag("--pm", o.pm, "add phase-modulator leakage at the same intensity");
    app.add_option("--dmin", o.d_min, "first distance [km]");
    app.add_option("--dmax", o.d_max, "last distance [km]");
    app.add_option("--dstep", o.d_step, "distance step [km]");
    app.add_option("--out", o.out, "output file, '-' for stdout");
    app.add_option("--format", o.format, "csv or jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    app.add_flag("-q,--quiet", quiet, "no progress on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    leakqkd::SweepConfig cfg;
    try {
        cfg = build_config(config_path, o);
    } catch (const leakqkd::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    }

    try {
        const auto rows = leakqkd::run_sweep(cfg, [&](const leakqkd::SweepRow& r) {
            if (quiet) return;
            std::fprintf(stderr, "i_max=%.3g d=%.2f km rate=%.4e %s\n", r.i_max, r.distance,
                         r.point.rate, leakqkd::to_string(r.point.status));
        });
        if (cfg.output_path == "-") {
            leakqkd::write_rows(std::cout, rows, cfg.format);
        } else {
            std::ofstream out(cfg.output_path, std::ios::binary);
            if (!out) {
                std::fprintf(stderr, "config error: cannot write '%s'\n", cfg.output_path.c_str());
                return 1;
            }
            leakqkd::write_rows(out, rows, cfg.format);
        }
    } catch (const leakqkd::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 2;
    } catch (const leakqkd::DomainError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 2;
    }
    return 0;
}
