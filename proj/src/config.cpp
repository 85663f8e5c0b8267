#include "cmorph/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "cmorph/error.hpp"

namespace cmorph {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError("cli_io", "parse_config", key + ": '" + v + "' is not a finite number");
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    int out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
        throw ConfigError("cli_io", "parse_config", key + ": '" + v + "' is not an integer");
    return out;
}

std::string fmt(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::vector<double> to_times(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double("times", trim(item)));
    return out;
}

// Assigns without re-deriving sigma_max.
void assign(MorphConfig& c, const std::string& key, const std::string& v) {
    GaborParams& g = c.gabor;
    if (key == "D") g.D = to_int(key, v);
    else if (key == "gamma") g.gamma = to_double(key, v);
    else if (key == "omega") g.omega = to_double(key, v);
    else if (key == "a0") g.a0 = to_double(key, v);
    else if (key == "b0") g.b0 = to_double(key, v);
    else if (key == "d") g.d = to_int(key, v);
    else if (key == "sigma_min") g.sigma_min = to_double(key, v);
    else if (key == "sigma_max") g.sigma_max = to_double(key, v);
    else if (key == "r_cut") g.r_cut = to_double(key, v);
    else if (key == "h1") c.metric.h1 = to_double(key, v);
    else if (key == "h2") c.metric.h2 = to_double(key, v);
    else if (key == "epsilon") c.epsilon = to_double(key, v);
    else if (key == "n_iter") c.n_iter = to_int(key, v);
    else if (key == "tol") c.tol = to_double(key, v);
    else if (key == "tau") c.tau = to_double(key, v);
    else if (key == "times") c.times = to_times(v);
    else if (key == "sigmoid_k") c.sigmoid_k = to_double(key, v);
    else if (key == "sigmoid_z0") c.sigmoid_z0 = to_double(key, v);
    else if (key == "splat_mode") c.splat_mode = splat_mode_from_string(v);
    else if (key == "baseline_epsilon") c.baseline_epsilon = to_double(key, v);
    else if (key == "baseline_n_iter") c.baseline_n_iter = to_int(key, v);
    else if (key == "metric_threshold") c.metric_threshold = to_double(key, v);
    else throw ConfigError("cli_io", "parse_config", "unknown key '" + key + "'");
}

void derive_sigma_max(MorphConfig& c) {
    c.gabor.sigma_max = c.gabor.sigma_min * std::log2(static_cast<double>(c.gabor.D));
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "D",        "gamma",      "omega",      "a0",        "b0",
        "d",        "sigma_min",  "sigma_max",  "r_cut",     "h1",
        "h2",       "epsilon",    "n_iter",     "tol",       "tau",
        "times",    "sigmoid_k",  "sigmoid_z0", "splat_mode", "baseline_epsilon",
        "baseline_n_iter", "metric_threshold"};
    return keys;
}

MorphConfig parse_config(std::string_view text) {
    MorphConfig cfg;
    std::map<std::string, std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("cli_io", "parse_config",
                              "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(s).substr(0, eq));
        const std::string value = trim(std::string_view(s).substr(eq + 1));
        if (seen.count(key))
            throw ConfigError("cli_io", "parse_config",
                              "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        try {
            assign(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("cli_io", "parse_config",
                              "line " + std::to_string(lineno) + ": " + e.what());
        }
        seen[key] = value;
    }
    if (seen.count("D") && !seen.count("sigma_max")) derive_sigma_max(cfg);
    cfg.validate();
    return cfg;
}

MorphConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cli_io", "load_config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

void apply_setting(MorphConfig& cfg, const std::string& key, const std::string& value) {
    assign(cfg, key, value);
    if (key == "D") derive_sigma_max(cfg);
}

std::string serialize_config(const MorphConfig& c) {
    const GaborParams& g = c.gabor;
    std::string times;
    for (std::size_t i = 0; i < c.times.size(); ++i) times += (i ? "," : "") + fmt(c.times[i]);
    std::ostringstream o;
    o << "D = " << g.D << "\n"
      << "gamma = " << fmt(g.gamma) << "\n"
      << "omega = " << fmt(g.omega) << "\n"
      << "a0 = " << fmt(g.a0) << "\n"
      << "b0 = " << fmt(g.b0) << "\n"
      << "d = " << g.d << "\n"
      << "sigma_min = " << fmt(g.sigma_min) << "\n"
      << "sigma_max = " << fmt(g.sigma_max) << "\n"
      << "r_cut = " << fmt(g.r_cut) << "\n"
      << "h1 = " << fmt(c.metric.h1) << "\n"
      << "h2 = " << fmt(c.metric.h2) << "\n"
      << "epsilon = " << fmt(c.epsilon) << "\n"
      << "n_iter = " << c.n_iter << "\n"
      << "tol = " << fmt(c.tol) << "\n"
      << "tau = " << fmt(c.tau) << "\n"
      << "times = " << times << "\n"
      << "sigmoid_k = " << fmt(c.sigmoid_k) << "\n"
      << "sigmoid_z0 = " << fmt(c.sigmoid_z0) << "\n"
      << "splat_mode = " << to_string(c.splat_mode) << "\n"
      << "baseline_epsilon = " << fmt(c.baseline_epsilon) << "\n"
      << "baseline_n_iter = " << c.baseline_n_iter << "\n"
      << "metric_threshold = " << fmt(c.metric_threshold) << "\n";
    return o.str();
}

}  // namespace cmorph
