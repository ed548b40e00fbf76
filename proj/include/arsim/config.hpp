#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "arsim/initial.hpp"
#include "arsim/params.hpp"

namespace arsim {

/// Configuration error with the offending line when known.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& msg, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

/// One sweep axis: parameter name plus the value list to scan.
struct SweepAxis {
    std::string parameter;
    std::vector<double> values;
};

/// Fully resolved run configuration: scheme parameters, initial data spec,
/// observer cadence, output location and optional sweep axes.
struct RunConfig {
    Params params;
    initial::Spec initial;
    int cadence = 1;
    int snapshot_cadence = 0;  // 0: final snapshot only
    std::string out_dir = "out";
    std::vector<SweepAxis> sweep;
    std::string label;  // sweep point tag, empty for plain runs
};

namespace config_detail {

struct Entry {
    std::string value;
    int line;
};

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const Entry& e) {
    try {
        std::size_t pos = 0;
        double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("value for '" + key + "' is not a number: '" + e.value + "'", e.line);
    }
}

inline long parse_int(const std::string& key, const Entry& e) {
    try {
        std::size_t pos = 0;
        long v = std::stol(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("value for '" + key + "' is not an integer: '" + e.value + "'",
                          e.line);
    }
}

inline std::uint64_t parse_u64(const std::string& key, const Entry& e) {
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("value for '" + key + "' is not an unsigned integer: '" + e.value +
                          "'", e.line);
    }
}

inline std::vector<double> parse_list(const std::string& key, const Entry& e) {
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw ConfigError("empty element in list for '" + key + "'", e.line);
        Entry one{item, e.line};
        out.push_back(parse_double(key, one));
    }
    if (out.empty()) throw ConfigError("value list for '" + key + "' is empty", e.line);
    return out;
}

}  // namespace config_detail

/// Parse sectioned key = value text ('#' or ';' comments). Unknown keys are
/// errors, every default is documented in the README, and each diagnostic
/// carries its line number.
inline RunConfig parse_config(const std::string& text) {
    using config_detail::Entry;
    std::map<std::string, Entry> kv;
    std::vector<std::pair<std::string, Entry>> sweep_entries;

    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = config_detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header '" + raw + "'", lineno);
            section = config_detail::trim(line.substr(1, line.size() - 2));
            static const std::set<std::string> known = {"model",  "grid",    "time", "solver",
                                                        "initial", "output", "sweep"};
            if (!known.count(section))
                throw ConfigError("unknown section '" + section + "'", lineno);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value', got '" + raw + "'", lineno);
        std::string key = config_detail::trim(line.substr(0, eq));
        std::string value = config_detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key before '='", lineno);
        if (value.empty()) throw ConfigError("missing value for '" + key + "'", lineno);
        if (section.empty())
            throw ConfigError("key '" + key + "' appears before any [section]", lineno);
        if (section == "sweep") {
            sweep_entries.emplace_back(key, Entry{value, lineno});
            continue;
        }
        std::string full = section + "." + key;
        if (kv.count(full)) throw ConfigError("duplicate key '" + full + "'", lineno);
        kv[full] = Entry{value, lineno};
    }

    static const std::set<std::string> known_keys = {
        "model.gamma",          "model.epsilon",        "model.delta",
        "model.kappa",          "grid.dim",             "grid.points",
        "grid.modes",           "time.dt",              "time.t_end",
        "solver.rho_floor",     "solver.picard_tol",    "solver.picard_max_iter",
        "solver.cfl_safety",    "initial.type",         "initial.rho_base",
        "initial.rho_amplitude","initial.width",        "initial.w_base",
        "initial.w_amplitude",  "initial.max_mode",     "initial.seed",
        "output.directory",     "output.cadence",       "output.snapshot_cadence"};
    for (const auto& [key, entry] : kv)
        if (!known_keys.count(key)) throw ConfigError("unknown key '" + key + "'", entry.line);

    for (const char* req : {"model.gamma", "grid.points", "time.dt", "time.t_end"})
        if (!kv.count(req)) throw ConfigError(std::string("missing required key '") + req + "'");

    RunConfig cfg;
    auto have = [&](const std::string& k) { return kv.count(k) != 0; };
    auto dbl = [&](const std::string& k, double dflt) {
        return have(k) ? config_detail::parse_double(k, kv[k]) : dflt;
    };
    auto integer = [&](const std::string& k, long dflt) {
        return have(k) ? config_detail::parse_int(k, kv[k]) : dflt;
    };

    Params& p = cfg.params;
    p.gamma = config_detail::parse_double("model.gamma", kv["model.gamma"]);
    p.epsilon = dbl("model.epsilon", 0.0);
    p.delta = dbl("model.delta", 0.0);
    p.kappa = dbl("model.kappa", 0.0);
    p.grid_points = static_cast<int>(config_detail::parse_int("grid.points", kv["grid.points"]));
    p.dim = static_cast<int>(integer("grid.dim", 2));
    p.n_modes = static_cast<int>(integer("grid.modes", default_n_modes(p.grid_points)));
    p.dt = config_detail::parse_double("time.dt", kv["time.dt"]);
    p.t_end = config_detail::parse_double("time.t_end", kv["time.t_end"]);
    p.rho_floor = dbl("solver.rho_floor", 1e-8);
    p.picard_tol = dbl("solver.picard_tol", 1e-10);
    p.picard_max_iter = static_cast<int>(integer("solver.picard_max_iter", 50));
    p.cfl_safety = dbl("solver.cfl_safety", 0.4);

    initial::Spec& ic = cfg.initial;
    if (have("initial.type")) ic.type = kv["initial.type"].value;
    ic.rho_base = dbl("initial.rho_base", 1.0);
    ic.rho_amplitude = dbl("initial.rho_amplitude", 0.3);
    ic.width = dbl("initial.width", 0.15);
    if (have("initial.w_base")) ic.w_base = config_detail::parse_list("initial.w_base",
                                                                      kv["initial.w_base"]);
    ic.w_amplitude = dbl("initial.w_amplitude", 0.0);
    ic.max_mode = static_cast<int>(integer("initial.max_mode", 2));
    if (have("initial.seed")) ic.seed = config_detail::parse_u64("initial.seed",
                                                                 kv["initial.seed"]);

    cfg.cadence = static_cast<int>(integer("output.cadence", 1));
    cfg.snapshot_cadence = static_cast<int>(integer("output.snapshot_cadence", 0));
    if (have("output.directory")) cfg.out_dir = kv["output.directory"].value;

    if (cfg.cadence < 1) throw ConfigError("output.cadence must be >= 1",
                                           have("output.cadence") ? kv["output.cadence"].line : 0);
    if (cfg.snapshot_cadence < 0)
        throw ConfigError("output.snapshot_cadence must be >= 0",
                          kv["output.snapshot_cadence"].line);

    static const std::set<std::string> generators = {"constant", "gaussian_blob", "sine_mixture",
                                                     "random_smooth"};
    if (!generators.count(ic.type))
        throw ConfigError("initial.type '" + ic.type +
                              "' is not one of constant, gaussian_blob, sine_mixture, "
                              "random_smooth",
                          kv["initial.type"].line);

    static const std::set<std::string> sweepable = {"gamma", "epsilon", "delta", "kappa",
                                                    "dt",    "modes",   "points"};
    for (auto& [name, entry] : sweep_entries) {
        if (!sweepable.count(name))
            throw ConfigError("sweep parameter '" + name + "' does not name a parameter "
                              "(sweepable: gamma, epsilon, delta, kappa, dt, modes, points)",
                              entry.line);
        SweepAxis axis;
        axis.parameter = name;
        axis.values = config_detail::parse_list("sweep." + name, entry);
        cfg.sweep.push_back(std::move(axis));
    }

    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        int line = 0;
        std::string what = e.what();
        if (what.find("gamma") != std::string::npos) line = kv["model.gamma"].line;
        throw ConfigError(what, line);
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Apply one sweep value to a copy of the base configuration.
inline void apply_sweep_value(RunConfig& cfg, const std::string& parameter, double value) {
    Params& p = cfg.params;
    if (parameter == "gamma")
        p.gamma = value;
    else if (parameter == "epsilon")
        p.epsilon = value;
    else if (parameter == "delta")
        p.delta = value;
    else if (parameter == "kappa")
        p.kappa = value;
    else if (parameter == "dt")
        p.dt = value;
    else if (parameter == "modes")
        p.n_modes = static_cast<int>(value);
    else if (parameter == "points")
        p.grid_points = static_cast<int>(value);
    else
        throw ConfigError("unknown sweep parameter '" + parameter + "'");
}

/// Cross product of all sweep axes; each derived config carries a label and a
/// per-point output subdirectory.
inline std::vector<RunConfig> expand_sweep(const RunConfig& base) {
    std::vector<RunConfig> out;
    if (base.sweep.empty()) return out;
    std::vector<std::size_t> idx(base.sweep.size(), 0);
    for (;;) {
        RunConfig cfg = base;
        cfg.sweep.clear();
        std::string label;
        for (std::size_t a = 0; a < base.sweep.size(); ++a) {
            const auto& axis = base.sweep[a];
            double v = axis.values[idx[a]];
            apply_sweep_value(cfg, axis.parameter, v);
            std::ostringstream tag;
            tag << axis.parameter << "=" << v;
            label += (label.empty() ? "" : ",") + tag.str();
        }
        cfg.label = label;
        cfg.params.validate();
        out.push_back(std::move(cfg));
        std::size_t a = 0;
        for (; a < idx.size(); ++a) {
            if (++idx[a] < base.sweep[a].values.size()) break;
            idx[a] = 0;
        }
        if (a == idx.size()) break;
    }
    return out;
}

}  // namespace arsim
