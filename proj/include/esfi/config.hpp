#pragma once

// INI-style run configuration shared by the command-line subcommands.
//
//   [params]           beta = 1.2208e-4 ... s_zero = 2.3335e5, source = explicit|fit
//   [initial]          f_pos = 68, f_neu = 40, f_neg = 265
//   [simulate]         t_end = 60, dt = 0.1, tol = 1e-8
//   [fit]              dataset, max_iterations, convergence_tol, restarts, seed
//   [fit.bounds]       <param> = lo, hi
//   [fit.guess]        <param> = value
//   [prcc]             samples, seed, spread, t_end, dt
//   [prcc.ranges]      <param> = lo, hi
//   [sweep]            index = C_neg_s, vary = p_plus, p_minus
//   [sweep.grid]       <param> = lo:hi:count  |  v1, v2, ...
//   [scenario.<name>]  <param> = value  |  *factor
//   [run]              workers

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "esfi/calibration.hpp"
#include "esfi/csv.hpp"
#include "esfi/model.hpp"
#include "esfi/scenario.hpp"
#include "esfi/sensitivity.hpp"

namespace esfi {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioOverride {
    Param param;
    double value;
    bool relative; // value multiplies the base
};

struct ScenarioDraft {
    std::string label;
    std::vector<ScenarioOverride> overrides;

    ScenarioSpec resolve(const ModelParams& base) const {
        ScenarioSpec s{label, {}};
        for (const auto& o : overrides)
            s.overrides.emplace_back(o.param, o.relative ? base.get(o.param) * o.value : o.value);
        return s;
    }
};

struct RunConfig {
    ModelParams params = reference_params();
    bool params_from_fit = false;
    std::array<double, 3> initial_forwarders{68.0, 40.0, 265.0};

    double t_end = 60.0;
    double dt = 0.1;
    double tol = kDefaultTolerance;

    std::string dataset = "builtin:negative-event";
    FitConfig fit;
    std::map<Param, Interval> fit_bounds;
    std::map<Param, double> fit_guess;

    std::size_t samples = 1000;
    std::uint64_t prcc_seed = 42;
    double spread = 0.5;
    double prcc_t_end = 60.0;
    double prcc_dt = 0.1;
    std::map<Param, Interval> prcc_ranges;

    IndexId sweep_index = IndexId::CNegStable;
    std::vector<Param> sweep_vary;
    std::map<Param, std::vector<double>> sweep_grids;

    std::vector<ScenarioDraft> scenarios;

    unsigned workers = 0;

    SensitivityOptions sensitivity_options(double horizon_end, double spacing) const {
        SensitivityOptions o;
        o.f_pos0 = initial_forwarders[0];
        o.f_neu0 = initial_forwarders[1];
        o.f_neg0 = initial_forwarders[2];
        o.horizon = TimeGrid::uniform(0.0, horizon_end, spacing);
        o.tol = tol;
        o.workers = workers;
        return o;
    }

    ParameterRanges prcc_ranges_for(const ModelParams& base) const {
        auto r = ranges_around(base, spread);
        for (const auto& [p, iv] : prcc_ranges) bound_of(r, p) = iv;
        return r;
    }

    FitConfig fit_config_for(const ObservedDataset& ds) const {
        FitConfig c = fit;
        c.workers = workers;
        c.integration_tol = tol;
        if (!fit_bounds.empty()) {
            auto b = default_fit_bounds(ds);
            for (const auto& [p, iv] : fit_bounds) bound_of(b, p) = iv;
            c.bounds = b;
        }
        return c;
    }

    ModelParams fit_guess_for(const ObservedDataset& ds) const {
        auto g = default_initial_guess(ds);
        for (const auto& [p, v] : fit_guess) g.set(p, v);
        return g;
    }
};

namespace detail {

inline double config_number(const std::string& section, const std::string& key,
                            const std::string& text) {
    const auto v = csv::parse_number(text);
    if (!v || !std::isfinite(*v))
        throw ConfigError("[" + section + "] " + key + ": not a number: '" + text + "'");
    return *v;
}

inline std::size_t config_count(const std::string& section, const std::string& key,
                                const std::string& text) {
    const double v = config_number(section, key, text);
    if (v < 0 || v != std::floor(v) || v > 1e15)
        throw ConfigError("[" + section + "] " + key + ": expected a non-negative integer");
    return std::size_t(v);
}

inline Param config_param(const std::string& section, const std::string& key) {
    const auto p = param_from_name(key);
    if (!p) throw ConfigError("[" + section + "] unknown parameter '" + key + "'");
    return *p;
}

inline Interval config_interval(const std::string& section, const std::string& key,
                                const std::string& text) {
    const auto parts = csv::split(text);
    if (parts.size() != 2) throw ConfigError("[" + section + "] " + key + ": expected 'lo, hi'");
    Interval iv{config_number(section, key, std::string(parts[0])),
                config_number(section, key, std::string(parts[1]))};
    if (!(iv.lo <= iv.hi)) throw ConfigError("[" + section + "] " + key + ": lo > hi");
    return iv;
}

/// "lo:hi:count" (inclusive linspace) or a comma-separated list.
inline std::vector<double> config_grid(const std::string& section, const std::string& key,
                                       const std::string& text) {
    const auto colon = csv::split(text, ':');
    std::vector<double> g;
    if (colon.size() == 3) {
        const double lo = config_number(section, key, std::string(colon[0]));
        const double hi = config_number(section, key, std::string(colon[1]));
        const std::size_t n = config_count(section, key, std::string(colon[2]));
        if (n == 0) throw ConfigError("[" + section + "] " + key + ": empty grid");
        for (std::size_t k = 0; k < n; ++k)
            g.push_back(n == 1 ? lo : lo + (hi - lo) * double(k) / double(n - 1));
    } else {
        for (auto part : csv::split(text)) g.push_back(config_number(section, key, std::string(part)));
    }
    return g;
}

} // namespace detail

inline RunConfig parse_config(const boost::property_tree::ptree& tree) {
    using namespace detail;
    RunConfig cfg;
    for (const auto& entry : tree) {
        const std::string& section = entry.first;
        const auto& body = entry.second;
        auto each = [&](auto&& handle) {
            for (const auto& [key, node] : body) handle(key, node.template get_value<std::string>());
        };
        auto unknown = [&](const std::string& key) {
            throw ConfigError("[" + section + "] unknown key '" + key + "'");
        };

        if (section == "params") {
            each([&](const std::string& key, const std::string& v) {
                if (key == "source") {
                    if (v == "fit")
                        cfg.params_from_fit = true;
                    else if (v == "explicit")
                        cfg.params_from_fit = false;
                    else
                        throw ConfigError("[params] source must be 'explicit' or 'fit'");
                    return;
                }
                cfg.params.set(config_param(section, key), config_number(section, key, v));
            });
        } else if (section == "initial") {
            each([&](const std::string& key, const std::string& v) {
                const double x = config_number(section, key, v);
                if (key == "f_pos") cfg.initial_forwarders[0] = x;
                else if (key == "f_neu") cfg.initial_forwarders[1] = x;
                else if (key == "f_neg") cfg.initial_forwarders[2] = x;
                else unknown(key);
            });
        } else if (section == "simulate") {
            each([&](const std::string& key, const std::string& v) {
                const double x = config_number(section, key, v);
                if (key == "t_end") cfg.t_end = x;
                else if (key == "dt") cfg.dt = x;
                else if (key == "tol") cfg.tol = x;
                else unknown(key);
            });
        } else if (section == "fit") {
            each([&](const std::string& key, const std::string& v) {
                if (key == "dataset") cfg.dataset = v;
                else if (key == "max_iterations") cfg.fit.max_iterations = config_count(section, key, v);
                else if (key == "convergence_tol") cfg.fit.convergence_tol = config_number(section, key, v);
                else if (key == "restarts") cfg.fit.restarts = unsigned(config_count(section, key, v));
                else if (key == "seed") cfg.fit.seed = config_count(section, key, v);
                else unknown(key);
            });
        } else if (section == "fit.bounds") {
            each([&](const std::string& key, const std::string& v) {
                cfg.fit_bounds[config_param(section, key)] = config_interval(section, key, v);
            });
        } else if (section == "fit.guess") {
            each([&](const std::string& key, const std::string& v) {
                cfg.fit_guess[config_param(section, key)] = config_number(section, key, v);
            });
        } else if (section == "prcc") {
            each([&](const std::string& key, const std::string& v) {
                if (key == "samples") cfg.samples = config_count(section, key, v);
                else if (key == "seed") cfg.prcc_seed = config_count(section, key, v);
                else if (key == "spread") cfg.spread = config_number(section, key, v);
                else if (key == "t_end") cfg.prcc_t_end = config_number(section, key, v);
                else if (key == "dt") cfg.prcc_dt = config_number(section, key, v);
                else unknown(key);
            });
        } else if (section == "prcc.ranges") {
            each([&](const std::string& key, const std::string& v) {
                cfg.prcc_ranges[config_param(section, key)] = config_interval(section, key, v);
            });
        } else if (section == "sweep") {
            each([&](const std::string& key, const std::string& v) {
                if (key == "index") {
                    const auto id = index_from_name(std::string(csv::trim(v)));
                    if (!id) throw ConfigError("[sweep] unknown index '" + v + "'");
                    cfg.sweep_index = *id;
                } else if (key == "vary") {
                    cfg.sweep_vary.clear();
                    for (auto name : csv::split(v))
                        cfg.sweep_vary.push_back(config_param(section, std::string(csv::trim(name))));
                } else {
                    unknown(key);
                }
            });
        } else if (section == "sweep.grid") {
            each([&](const std::string& key, const std::string& v) {
                cfg.sweep_grids[config_param(section, key)] = config_grid(section, key, v);
            });
        } else if (section.rfind("scenario.", 0) == 0) {
            ScenarioDraft d{section.substr(9), {}};
            if (d.label.empty()) throw ConfigError("scenario section needs a name");
            each([&](const std::string& key, const std::string& v) {
                const auto text = std::string(csv::trim(v));
                const bool rel = !text.empty() && text.front() == '*';
                d.overrides.push_back({config_param(section, key),
                                       config_number(section, key, rel ? text.substr(1) : text), rel});
            });
            cfg.scenarios.push_back(std::move(d));
        } else if (section == "run") {
            each([&](const std::string& key, const std::string& v) {
                if (key == "workers") cfg.workers = unsigned(config_count(section, key, v));
                else unknown(key);
            });
        } else {
            throw ConfigError("unknown section [" + section + "]");
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        throw ConfigError("config file not found: " + path.string());
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
    }
    return parse_config(tree);
}

inline RunConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("cannot parse config: ") + e.what());
    }
    return parse_config(tree);
}

} // namespace esfi
