#include "leakqkd/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "leakqkd/errors.hpp"

namespace leakqkd {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string number_text(double v) {
    // shortest text that parses back to the same double
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

[[noreturn]] void mismatch(const std::string& key, const char* expected, const std::string& raw,
                           int line) {
    throw ConfigError("key '" + key + "' expects " + expected + ", got '" + raw + "'", line);
}

double parse_number(const std::string& key, const std::string& raw, int line) {
    double v = 0.0;
    const char* end = raw.data() + raw.size();
    const auto [ptr, ec] = std::from_chars(raw.data(), end, v);
    if (raw.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        mismatch(key, "a finite number", raw, line);
    }
    return v;
}

int parse_integer(const std::string& key, const std::string& raw, int line) {
    int v = 0;
    const char* end = raw.data() + raw.size();
    const auto [ptr, ec] = std::from_chars(raw.data(), end, v);
    if (raw.empty() || ec != std::errc{} || ptr != end) mismatch(key, "an integer", raw, line);
    return v;
}

bool parse_bool(const std::string& key, const std::string& raw, int line) {
    if (raw == "true") return true;
    if (raw == "false") return false;
    mismatch(key, "true or false", raw, line);
}

std::vector<double> parse_list(const std::string& key, const std::string& raw, int line) {
    std::string body = raw;
    if (!body.empty() && body.front() == '[') {
        if (body.back() != ']') mismatch(key, "a list of numbers like [1e-6, 1e-7]", raw, line);
        body = body.substr(1, body.size() - 2);
    }
    std::vector<double> out;
    if (trim(body).empty()) return out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        double v = 0.0;
        const char* end = t.data() + t.size();
        const auto [ptr, ec] = std::from_chars(t.data(), end, v);
        if (t.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
            mismatch(key, "a list of numbers like [1e-6, 1e-7]", raw, line);
        }
        out.push_back(v);
    }
    return out;
}

std::string parse_text(const std::string& key, const std::string& raw, int line) {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
        const std::string inner = raw.substr(1, raw.size() - 2);
        if (inner.find('"') != std::string::npos) mismatch(key, "a string", raw, line);
        return inner;
    }
    if (raw.empty() || raw.find('"') != std::string::npos) mismatch(key, "a string", raw, line);
    return raw;
}

struct Field {
    const char* key;
    void (*set)(SweepConfig&, const std::string& key, const std::string& raw, int line);
    std::string (*get)(const SweepConfig&);
};

#define NUMBER_FIELD(name, member)                                                      \
    Field {                                                                             \
        name,                                                                           \
            [](SweepConfig& c, const std::string& k, const std::string& r, int l) {     \
                c.member = parse_number(k, r, l);                                       \
            },                                                                          \
            [](const SweepConfig& c) { return number_text(c.member); }                  \
    }
#define INTEGER_FIELD(name, member)                                                     \
    Field {                                                                             \
        name,                                                                           \
            [](SweepConfig& c, const std::string& k, const std::string& r, int l) {     \
                c.member = parse_integer(k, r, l);                                      \
            },                                                                          \
            [](const SweepConfig& c) { return std::to_string(c.member); }               \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table{
        Field{"case",
              [](SweepConfig& c, const std::string& k, const std::string& r, int l) {
                  const int v = parse_integer(k, r, l);
                  if (v < 1 || v > 3) throw ConfigError("key 'case' must be 1, 2 or 3", l);
                  c.leak_case = static_cast<LeakageCase>(v);
              },
              [](const SweepConfig& c) { return std::to_string(static_cast<int>(c.leak_case)); }},
        Field{"i_max",
              [](SweepConfig& c, const std::string& k, const std::string& r, int l) {
                  c.i_max = parse_list(k, r, l);
              },
              [](const SweepConfig& c) {
                  std::string s = "[";
                  for (std::size_t i = 0; i < c.i_max.size(); ++i) {
                      if (i > 0) s += ", ";
                      s += number_text(c.i_max[i]);
                  }
                  return s + "]";
              }},
        Field{"pm_enabled",
              [](SweepConfig& c, const std::string& k, const std::string& r, int l) {
                  c.engine.pm_enabled = parse_bool(k, r, l);
              },
              [](const SweepConfig& c) {
                  return std::string(c.engine.pm_enabled ? "true" : "false");
              }},
        NUMBER_FIELD("d_min", d_min),
        NUMBER_FIELD("d_max", d_max),
        NUMBER_FIELD("d_step", d_step),
        NUMBER_FIELD("alpha", engine.channel.alpha),
        NUMBER_FIELD("eta_b", engine.channel.eta_b),
        NUMBER_FIELD("eta_det", engine.channel.eta_det),
        NUMBER_FIELD("p_d", engine.channel.p_d),
        NUMBER_FIELD("e_d", engine.channel.e_d),
        NUMBER_FIELD("gamma_w", engine.gamma_w),
        NUMBER_FIELD("f_ec", engine.protocol.f_ec),
        NUMBER_FIELD("q_eff", engine.protocol.q_eff),
        INTEGER_FIELD("s_cut", engine.estimator.s_cut),
        INTEGER_FIELD("p_cut", engine.p_cut),
        INTEGER_FIELD("grid.gamma_s_points", engine.grid.gamma_s_points),
        INTEGER_FIELD("grid.gamma_v_points", engine.grid.gamma_v_points),
        INTEGER_FIELD("grid.theta_points", engine.grid.theta_points),
        INTEGER_FIELD("grid.refine", engine.grid.refine),
        NUMBER_FIELD("grid.gamma_s_min", engine.grid.gamma_s_min),
        NUMBER_FIELD("grid.gamma_s_max", engine.grid.gamma_s_max),
        Field{"output.path",
              [](SweepConfig& c, const std::string& k, const std::string& r, int l) {
                  c.output_path = parse_text(k, r, l);
              },
              [](const SweepConfig& c) { return "\"" + c.output_path + "\""; }},
        Field{"output.format",
              [](SweepConfig& c, const std::string& k, const std::string& r, int l) {
                  const std::string v = parse_text(k, r, l);
                  if (v == "csv") {
                      c.format = OutputFormat::Csv;
                  } else if (v == "jsonl") {
                      c.format = OutputFormat::JsonLines;
                  } else {
                      mismatch(k, "csv or jsonl", r, l);
                  }
              },
              [](const SweepConfig& c) {
                  return std::string(c.format == OutputFormat::Csv ? "csv" : "jsonl");
              }},
    };
    return table;
}

#undef NUMBER_FIELD
#undef INTEGER_FIELD

// Strips a trailing comment, leaving '#' inside a quoted string alone.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9e", v);
    return buf;
}

// Rethrows a component's DomainError as a configuration error.
template <class F>
void check(const char* what, F&& f) {
    try {
        f();
    } catch (const DomainError& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const Field& f : fields()) k.emplace_back(f.key);
        return k;
    }();
    return keys;
}

void SweepConfig::validate() const {
    if (i_max.empty()) throw ConfigError("i_max needs at least one value");
    for (double v : i_max) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("i_max entries must be >= 0");
    }
    if (!std::isfinite(d_min) || !(d_min >= 0.0)) throw ConfigError("d_min must be >= 0");
    if (!std::isfinite(d_max)) throw ConfigError("d_max must be finite");
    if (!(d_step > 0.0) || !std::isfinite(d_step)) throw ConfigError("d_step must be > 0");
    check("channel", [&] { engine.channel.validate(); });
    check("s_cut", [&] { engine.estimator.validate(); });
    check("protocol", [&] { engine.protocol.validate(); });
    check("grid", [&] { engine.grid.validate(); });
    if (!(engine.gamma_w >= 0.0 && engine.gamma_w < engine.grid.gamma_s_min)) {
        throw ConfigError("gamma_w must lie in [0, grid.gamma_s_min)");
    }
    if (engine.p_cut < 1) throw ConfigError("p_cut must be >= 1");
    for (double v : i_max) {
        LeakageModel m;
        m.leak_case = leak_case;
        m.i_max = v;
        m.p_cut = engine.p_cut;
        check("i_max", [&] { m.validate(); });
    }
    if (output_path.empty()) throw ConfigError("output.path must not be empty");
}

bool operator==(const SweepConfig& a, const SweepConfig& b) {
    const EngineSettings& x = a.engine;
    const EngineSettings& y = b.engine;
    return a.leak_case == b.leak_case && a.i_max == b.i_max && a.d_min == b.d_min &&
           a.d_max == b.d_max && a.d_step == b.d_step && a.output_path == b.output_path &&
           a.format == b.format && x.pm_enabled == y.pm_enabled && x.gamma_w == y.gamma_w &&
           x.p_cut == y.p_cut && x.channel.alpha == y.channel.alpha &&
           x.channel.distance == y.channel.distance && x.channel.eta_b == y.channel.eta_b &&
           x.channel.eta_det == y.channel.eta_det && x.channel.p_d == y.channel.p_d &&
           x.channel.e_d == y.channel.e_d && x.estimator.s_cut == y.estimator.s_cut &&
           x.estimator.lp_tolerance == y.estimator.lp_tolerance &&
           x.protocol.f_ec == y.protocol.f_ec && x.protocol.q_eff == y.protocol.q_eff &&
           x.grid.gamma_s_points == y.grid.gamma_s_points &&
           x.grid.gamma_v_points == y.grid.gamma_v_points &&
           x.grid.theta_points == y.grid.theta_points && x.grid.refine == y.grid.refine &&
           x.grid.gamma_s_min == y.grid.gamma_s_min && x.grid.gamma_s_max == y.grid.gamma_s_max;
}

SweepConfig parse_config(std::string_view text) {
    SweepConfig cfg;
    std::map<std::string, int> seen;
    std::istringstream in{std::string(text)};
    std::string raw_line;
    int line = 0;
    while (std::getline(in, raw_line)) {
        ++line;
        const std::string content = trim(strip_comment(raw_line));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
        const std::string key = trim(std::string_view(content).substr(0, eq));
        const std::string value = trim(std::string_view(content).substr(eq + 1));
        const auto& table = fields();
        const auto it = std::find_if(table.begin(), table.end(),
                                     [&](const Field& f) { return key == f.key; });
        if (it == table.end()) {
            std::string valid;
            for (const std::string& k : config_keys()) valid += (valid.empty() ? "" : ", ") + k;
            throw ConfigError("unknown key '" + key + "'; valid keys: " + valid, line);
        }
        const auto [prev, inserted] = seen.emplace(key, line);
        if (!inserted) {
            throw ConfigError("duplicate key '" + key + "' (first set on line " +
                                  std::to_string(prev->second) + ")",
                              line);
        }
        it->set(cfg, key, value, line);
    }
    cfg.validate();
    return cfg;
}

SweepConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const SweepConfig& cfg) {
    std::string out;
    for (const Field& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
    return out;
}

std::vector<double> sweep_distances(const SweepConfig& cfg) {
    std::vector<double> out;
    if (cfg.d_min > cfg.d_max) return out;
    const double slack = 1e-9 * cfg.d_step;
    for (long k = 0;; ++k) {
        const double d = cfg.d_min + static_cast<double>(k) * cfg.d_step;
        if (d > cfg.d_max + slack) break;
        out.push_back(std::min(d, cfg.d_max));
    }
    return out;
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg,
                                const std::function<void(const SweepRow&)>& progress) {
    cfg.validate();
    std::vector<double> levels = cfg.i_max;
    std::sort(levels.begin(), levels.end());
    const std::vector<double> distances = sweep_distances(cfg);
    std::vector<SweepRow> rows;
    rows.reserve(levels.size() * distances.size());
    for (double i_max : levels) {
        for (double d : distances) {
            SweepRow row;
            row.distance = d;
            row.i_max = i_max;
            row.leak_case = cfg.leak_case;
            row.pm_enabled = cfg.engine.pm_enabled;
            row.point = optimize_key_rate(d, cfg.leak_case, i_max, cfg.engine);
            rows.push_back(row);
            if (progress) progress(rows.back());
        }
    }
    return rows;
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{
        "distance_km", "i_max",       "case",        "pm_enabled",  "key_rate",
        "gamma_s_opt", "gamma_v_opt", "theta_v_opt", "theta_w_opt", "y0_l",
        "y1_l",        "e1_u",        "phase_err",   "status"};
    return cols;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const SweepRow& r : rows) {
        const OptimalPoint& p = r.point;
        out << sci(r.distance) << ',' << sci(r.i_max) << ',' << static_cast<int>(r.leak_case)
            << ',' << (r.pm_enabled ? 1 : 0) << ',' << sci(p.rate) << ',' << sci(p.gamma_s)
            << ',' << sci(p.gamma_v) << ',' << sci(p.theta_v) << ',' << sci(p.theta_w) << ','
            << sci(p.bounds.y0_l) << ',' << sci(p.bounds.y1_l) << ',' << sci(p.bounds.e1_u)
            << ',' << sci(p.phase_err) << ',' << to_string(p.status) << '\n';
    }
}

void write_jsonl(std::ostream& out, const std::vector<SweepRow>& rows) {
    for (const SweepRow& r : rows) {
        const OptimalPoint& p = r.point;
        nlohmann::ordered_json j;
        j["distance_km"] = r.distance;
        j["i_max"] = r.i_max;
        j["case"] = static_cast<int>(r.leak_case);
        j["pm_enabled"] = r.pm_enabled;
        j["key_rate"] = p.rate;
        j["gamma_s_opt"] = p.gamma_s;
        j["gamma_v_opt"] = p.gamma_v;
        j["theta_v_opt"] = p.theta_v;
        j["theta_w_opt"] = p.theta_w;
        j["y0_l"] = p.bounds.y0_l;
        j["y1_l"] = p.bounds.y1_l;
        j["e1_u"] = p.bounds.e1_u;
        j["phase_err"] = p.phase_err;
        j["status"] = to_string(p.status);
        out << j.dump() << '\n';
    }
}

void write_rows(std::ostream& out, const std::vector<SweepRow>& rows, OutputFormat format) {
    if (format == OutputFormat::Csv) {
        write_csv(out, rows);
    } else {
        write_jsonl(out, rows);
    }
}

}  // namespace leakqkd
