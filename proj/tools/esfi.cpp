// Command-line front end: simulate, fit, prcc, sweep, scenario.
//
// Exit status: 0 success, 1 analysis failure (diagnostics still written),
// 2 input or configuration error.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "esfi/esfi.hpp"

namespace fs = std::filesystem;
using namespace esfi;

namespace {

struct Options {
    std::string config;
    std::string dataset;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::optional<unsigned> workers;
    std::string out = ".";
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

RunConfig load_run_config(const Options& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (!o.dataset.empty()) cfg.dataset = o.dataset;
    if (o.seed) {
        cfg.fit.seed = *o.seed;
        cfg.prcc_seed = *o.seed;
    }
    if (o.samples) cfg.samples = *o.samples;
    if (o.workers) cfg.workers = *o.workers;
    return cfg;
}

ObservedDataset load_dataset(const std::string& source) {
    if (source == "builtin:negative-event") return builtin_negative_event();
    std::ifstream in(source);
    if (!in) throw ConfigError("cannot open dataset: " + source);
    auto ds = load_csv(in);
    ds.provenance = source;
    return ds;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    body(out);
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
    std::cout << "wrote " << path.string() << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
    write_file(path, [&](std::ostream& out) { out << text; });
}

fs::path prepare_out(const Options& o) {
    fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

const char* kEmotionColor[3] = {"#e6550d", "#31a354", "#3182bd"};
const char* kModelColor[3] = {"#d62728", "#9467bd", "#000000"};

void print_params(const ModelParams& p) {
    for (Param id : kParams) std::cout << "  " << param_name(id) << " = " << p.get(id) << '\n';
}

ModelParams resolve_base(const RunConfig& cfg) {
    if (!cfg.params_from_fit) {
        require_valid(cfg.params);
        return cfg.params;
    }
    const auto ds = load_dataset(cfg.dataset);
    const auto r = fit(ds, cfg.fit_config_for(ds), cfg.fit_guess_for(ds));
    std::cout << "base parameters fitted to " << ds.provenance << " (objective " << r.objective
              << ")\n";
    print_params(r.params);
    return r.params;
}

int cmd_simulate(const Options& o) {
    const auto cfg = load_run_config(o);
    const auto params = resolve_base(cfg);
    const auto dir = prepare_out(o);
    const auto& f0 = cfg.initial_forwarders;
    const auto init = make_initial_state(params, f0[0], f0[1], f0[2]);
    const auto traj = integrate(params, init, TimeGrid::uniform(0.0, cfg.t_end, cfg.dt), cfg.tol);

    write_file(dir / "trajectory.csv", [&](std::ostream& out) { export_trajectory(traj, out); });

    svg::Chart inst{"Instantaneous forwarders", "t (sampling periods)", "F", {}};
    svg::Chart cum{"Cumulative forwards", "t (sampling periods)", "C", {}};
    for (Emotion e : kEmotions) {
        const auto k = static_cast<std::size_t>(e);
        svg::Series fi{"F_" + std::string(emotion_name(e)), kEmotionColor[k], {}, {}};
        svg::Series ci{"C_" + std::string(emotion_name(e)), kEmotionColor[k], {}, {}};
        for (std::size_t i = 0; i < traj.size(); ++i) {
            fi.x.push_back(traj.time(i));
            fi.y.push_back(traj.states[i].forwarders(e));
            ci.x.push_back(traj.time(i));
            ci.y.push_back(traj.states[i].cumulative(e));
        }
        inst.series.push_back(std::move(fi));
        cum.series.push_back(std::move(ci));
    }
    write_text(dir / "simulate_instantaneous.svg", svg::render(inst));
    write_text(dir / "simulate_cumulative.svg", svg::render(cum));

    for (Emotion e : kEmotions) {
        const auto pk = peak_instantaneous(traj, e);
        std::cout << "F_" << emotion_name(e) << " peak " << pk.value << " at t=" << pk.time << ", C_"
                  << emotion_name(e) << "(t_end) = " << traj.states.back().cumulative(e) << '\n';
    }
    return 0;
}

int cmd_fit(const Options& o) {
    const auto cfg = load_run_config(o);
    const auto ds = load_dataset(cfg.dataset);
    const auto dir = prepare_out(o);
    const auto result = fit(ds, cfg.fit_config_for(ds), cfg.fit_guess_for(ds));

    write_text(dir / "fit_report.json", fit_report_json(result, ds).dump(2) + "\n");
    write_file(dir / "residuals.csv", [&](std::ostream& out) { write_residuals_csv(result, ds, out); });

    const double t_last = ds.times().back();
    const auto init = make_initial_state(result.params, ds.c_pos[0], ds.c_neu[0], ds.c_neg[0]);
    const auto curve = integrate(result.params, init,
                                 TimeGrid::uniform(0.0, t_last, std::max(t_last / 300.0, 1e-3)),
                                 cfg.tol);
    svg::Chart chart{"Cumulative forwards: observed vs fitted", "t (sampling periods)", "C", {}};
    const auto times = ds.times();
    for (Emotion e : kEmotions) {
        const auto k = static_cast<std::size_t>(e);
        chart.series.push_back({"observed C_" + std::string(emotion_name(e)), kEmotionColor[k], times,
                                ds.series(e), svg::Style::Stars});
    }
    for (Emotion e : kEmotions) {
        const auto k = static_cast<std::size_t>(e);
        svg::Series s{"fitted C_" + std::string(emotion_name(e)), kModelColor[k], {}, {}};
        for (std::size_t i = 0; i < curve.size(); ++i) {
            s.x.push_back(curve.time(i));
            s.y.push_back(curve.states[i].cumulative(e));
        }
        chart.series.push_back(std::move(s));
    }
    write_text(dir / "fit.svg", svg::render(chart));

    std::cout << "objective " << result.objective << ", RMSE pos/neu/neg " << result.per_series_rmse[0]
              << " / " << result.per_series_rmse[1] << " / " << result.per_series_rmse[2] << '\n';
    print_params(result.params);
    if (!result.converged) {
        std::cerr << "fit did not converge: " << result.message << '\n';
        return 1;
    }
    return 0;
}

int cmd_prcc(const Options& o) {
    const auto cfg = load_run_config(o);
    const auto base = resolve_base(cfg);
    const auto dir = prepare_out(o);
    const auto ranges = cfg.prcc_ranges_for(base);
    const auto rep = sensitivity_run(base, ranges, cfg.samples, cfg.prcc_seed,
                                     cfg.sensitivity_options(cfg.prcc_t_end, cfg.prcc_dt));

    write_file(dir / "prcc.csv", [&](std::ostream& out) { write_prcc_csv(rep, out); });
    write_text(dir / "prcc.json", prcc_report_json(rep).dump(2) + "\n");
    for (IndexId id : kIndices) {
        std::vector<svg::Bar> bars;
        for (Param p : kParams) {
            const auto& v = rep.at(p, id).value;
            bars.push_back({std::string(param_name(p)), v ? *v : std::nan("")});
        }
        write_text(dir / ("prcc_" + std::string(index_name(id)) + ".svg"),
                   svg::render_bars("PRCC on " + std::string(index_name(id)), bars,
                                    {kStrongThreshold, kMedianThreshold}));
    }
    if (rep.failed_samples > 0)
        std::cout << rep.failed_samples << " samples excluded (below the 1% failure budget)\n";
    return 0;
}

int cmd_sweep(const Options& o) {
    const auto cfg = load_run_config(o);
    const auto base = resolve_base(cfg);
    const auto dir = prepare_out(o);
    std::vector<Param> vary = cfg.sweep_vary;
    if (vary.empty()) vary.push_back(Param::PPlus);
    std::vector<std::vector<double>> grids;
    for (Param p : vary) {
        if (auto it = cfg.sweep_grids.find(p); it != cfg.sweep_grids.end()) {
            grids.push_back(it->second);
        } else {
            std::vector<double> g;
            for (int k = 0; k < 10; ++k) g.push_back(base.get(p) * (0.5 + k / 9.0));
            grids.push_back(std::move(g));
        }
    }
    const auto res =
        sweep_grid(base, vary, grids, cfg.sweep_index, cfg.sensitivity_options(cfg.prcc_t_end, cfg.prcc_dt));
    write_file(dir / "sweep.csv", [&](std::ostream& out) { write_sweep_csv(res, out); });

    if (vary.size() <= 2) {
        svg::Chart chart{std::string(index_name(res.index)) + " sweep", std::string(param_name(vary[0])),
                         std::string(index_name(res.index)), {}};
        const std::size_t inner = vary.size() == 2 ? grids[1].size() : 1;
        static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                        "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
        for (std::size_t j = 0; j < inner; ++j) {
            svg::Series s;
            s.name = vary.size() == 2 ? std::string(param_name(vary[1])) + "=" + csv::format_number(grids[1][j])
                                      : std::string(index_name(res.index));
            s.color = palette[j % 10];
            for (std::size_t i = 0; i < grids[0].size(); ++i) {
                const auto& v = res.values[i * inner + j];
                s.x.push_back(grids[0][i]);
                s.y.push_back(v ? *v : std::nan(""));
            }
            chart.series.push_back(std::move(s));
        }
        write_text(dir / "sweep.svg", svg::render(chart));
    }
    return 0;
}

int cmd_scenario(const Options& o) {
    const auto cfg = load_run_config(o);
    const auto base = resolve_base(cfg);
    const auto dir = prepare_out(o);
    std::vector<ScenarioSpec> specs;
    for (const auto& d : cfg.scenarios) specs.push_back(d.resolve(base));
    const auto cmp = compare_scenarios(base, specs, cfg.sensitivity_options(cfg.prcc_t_end, cfg.prcc_dt));
    write_file(dir / "scenario.csv", [&](std::ostream& out) { write_scenario_csv(cmp, out); });
    write_text(dir / "scenario.json", scenario_report_json(cmp).dump(2) + "\n");
    for (const auto& row : cmp.rows) {
        std::cout << row.label << ":";
        for (IndexId id : kIndices)
            std::cout << ' ' << index_name(id) << '=' << row.indices[id];
        std::cout << '\n';
    }
    return 0;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "INI configuration file");
    sub->add_option("--dataset", o.dataset, "dataset CSV path or builtin:negative-event");
    sub->add_option("--seed", o.seed, "random seed for restarts / sampling");
    sub->add_option("--samples", o.samples, "Latin hypercube sample count");
    sub->add_option("--workers", o.workers, "worker threads (0 = all cores)");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"E-SFI emotional information propagation: simulation, calibration, sensitivity"};
    app.require_subcommand(1);
    Options opts;
    std::function<int(const Options&)> command;

    const std::pair<const char*, const char*> subs[] = {
        {"simulate", "integrate the model and write trajectory.csv"},
        {"fit", "least-squares calibration against a cumulative dataset"},
        {"prcc", "Latin hypercube / PRCC sensitivity analysis"},
        {"sweep", "evaluate one index over a grid of up to three parameters"},
        {"scenario", "compare intervention scenarios against the base"},
    };
    const std::function<int(const Options&)> handlers[] = {cmd_simulate, cmd_fit, cmd_prcc, cmd_sweep,
                                                           cmd_scenario};
    for (std::size_t k = 0; k < std::size(subs); ++k) {
        auto* sub = app.add_subcommand(subs[k].first, subs[k].second);
        add_common(sub, opts);
        sub->callback([&, k] { command = handlers[k]; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        return command(opts);
    } catch (const InfeasibleScenario& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: dataset: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "analysis failed: " << e.what() << '\n';
        return 1;
    }
}
