#pragma once

// JSON and CSV serialisation of fit, sensitivity, sweep and scenario results.

#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "esfi/calibration.hpp"
#include "esfi/csv.hpp"
#include "esfi/dataset.hpp"
#include "esfi/scenario.hpp"
#include "esfi/sensitivity.hpp"

namespace esfi {

inline nlohmann::ordered_json params_to_json(const ModelParams& p) {
    nlohmann::ordered_json j;
    for (Param id : kParams) j[std::string(param_name(id))] = p.get(id);
    return j;
}

/// Missing keys keep the value from `defaults`.
inline ModelParams params_from_json(const nlohmann::json& j, ModelParams defaults = {}) {
    for (Param id : kParams) {
        const auto key = std::string(param_name(id));
        if (j.contains(key)) defaults.set(id, j.at(key).get<double>());
    }
    return defaults;
}

inline nlohmann::ordered_json fit_report_json(const FitResult& r, const ObservedDataset& ds) {
    nlohmann::ordered_json j;
    j["parameters"] = params_to_json(r.params);
    j["objective"] = r.objective;
    nlohmann::ordered_json rmse, resid;
    for (Emotion e : kEmotions) {
        const auto key = "c_" + std::string(emotion_name(e));
        rmse[key] = r.per_series_rmse[static_cast<std::size_t>(e)];
        resid[key] = r.residual_series[static_cast<std::size_t>(e)];
    }
    j["per_series_rmse"] = rmse;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["evaluations"] = r.evaluations;
    j["message"] = r.message;
    j["sample_index"] = ds.sample_index;
    j["residuals"] = resid;
    j["dataset"] = ds.provenance;
    return j;
}

inline void write_residuals_csv(const FitResult& r, const ObservedDataset& ds, std::ostream& out) {
    const auto t = ds.times();
    out << "t,sample,model_c_pos,model_c_neu,model_c_neg,obs_c_pos,obs_c_neu,obs_c_neg,"
           "resid_c_pos,resid_c_neu,resid_c_neg\n";
    for (std::size_t k = 0; k < ds.size(); ++k) {
        out << csv::format_number(t[k]) << ',' << ds.sample_index[k];
        for (Emotion e : kEmotions)
            out << ','
                << csv::format_number(ds.series(e)[k] +
                                      r.residual_series[static_cast<std::size_t>(e)][k]);
        for (Emotion e : kEmotions) out << ',' << csv::format_number(ds.series(e)[k]);
        for (Emotion e : kEmotions)
            out << ',' << csv::format_number(r.residual_series[static_cast<std::size_t>(e)][k]);
        out << '\n';
    }
    if (!out) throw IoError("failed writing residuals");
}

/// Rows are parameters, columns the six indices; undefined entries are empty.
inline void write_prcc_csv(const SensitivityReport& rep, std::ostream& out) {
    out << "parameter";
    for (IndexId id : kIndices) out << ',' << index_name(id);
    out << '\n';
    for (Param p : kParams) {
        out << param_name(p);
        for (IndexId id : kIndices) {
            out << ',';
            if (const auto& v = rep.at(p, id).value) out << csv::format_number(*v);
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing PRCC table");
}

inline nlohmann::ordered_json prcc_report_json(const SensitivityReport& rep) {
    nlohmann::ordered_json j;
    j["n_samples"] = rep.n_samples;
    j["seed"] = rep.seed;
    j["failed_samples"] = rep.failed_samples;
    j["failures"] = rep.failures;
    nlohmann::ordered_json ranges;
    for (Param p : kParams) {
        const auto& b = bound_of(rep.ranges, p);
        ranges[std::string(param_name(p))] = {b.lo, b.hi};
    }
    j["ranges"] = ranges;
    j["thresholds"] = {{"strong", kStrongThreshold}, {"median", kMedianThreshold}};
    nlohmann::ordered_json entries;
    for (Param p : kParams) {
        nlohmann::ordered_json row;
        for (IndexId id : kIndices) {
            const auto& e = rep.at(p, id);
            nlohmann::ordered_json cell;
            cell["prcc"] = e.value ? nlohmann::ordered_json(*e.value) : nlohmann::ordered_json();
            cell["strength"] = e.strength ? nlohmann::ordered_json(std::string(strength_name(*e.strength)))
                                          : nlohmann::ordered_json();
            row[std::string(index_name(id))] = cell;
        }
        entries[std::string(param_name(p))] = row;
    }
    j["prcc"] = entries;
    return j;
}

inline void write_sweep_csv(const SweepResult& s, std::ostream& out) {
    for (Param p : s.vary) out << param_name(p) << ',';
    out << index_name(s.index) << '\n';
    const auto shape = s.shape();
    for (std::size_t flat = 0; flat < s.values.size(); ++flat) {
        std::vector<std::size_t> at(shape.size());
        std::size_t rem = flat;
        for (std::size_t a = shape.size(); a-- > 0;) {
            at[a] = rem % shape[a];
            rem /= shape[a];
        }
        for (std::size_t a = 0; a < shape.size(); ++a)
            out << csv::format_number(s.grids[a][at[a]]) << ',';
        if (s.values[flat]) out << csv::format_number(*s.values[flat]);
        out << '\n';
    }
    if (!out) throw IoError("failed writing sweep table");
}

inline void write_scenario_csv(const ScenarioComparison& c, std::ostream& out) {
    out << "scenario";
    for (Param p : kParams) out << ',' << param_name(p);
    for (IndexId id : kIndices) out << ',' << index_name(id);
    for (IndexId id : kIndices) out << ",delta_" << index_name(id);
    for (IndexId id : kIndices) out << ",delta_pct_" << index_name(id);
    out << '\n';
    for (const auto& row : c.rows) {
        out << row.label;
        for (Param p : kParams) out << ',' << csv::format_number(row.params.get(p));
        for (double v : row.indices.values) out << ',' << csv::format_number(v);
        for (double v : row.delta) out << ',' << csv::format_number(v);
        for (const auto& v : row.delta_percent) {
            out << ',';
            if (v) out << csv::format_number(*v);
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing scenario table");
}

inline nlohmann::ordered_json scenario_report_json(const ScenarioComparison& c) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : c.rows) {
        nlohmann::ordered_json r;
        r["label"] = row.label;
        r["parameters"] = params_to_json(row.params);
        nlohmann::ordered_json ind, d, dp;
        for (IndexId id : kIndices) {
            const auto k = static_cast<std::size_t>(id);
            const auto name = std::string(index_name(id));
            ind[name] = row.indices.values[k];
            d[name] = row.delta[k];
            dp[name] = row.delta_percent[k] ? nlohmann::ordered_json(*row.delta_percent[k])
                                            : nlohmann::ordered_json();
        }
        r["indices"] = ind;
        r["stable"] = row.indices.stable;
        r["delta"] = d;
        r["delta_percent"] = dp;
        rows.push_back(r);
    }
    return {{"scenarios", rows}};
}

} // namespace esfi
