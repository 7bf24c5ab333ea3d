#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "esfi/errors.hpp"
#include "esfi/model.hpp"
#include "esfi/sensitivity.hpp"

namespace esfi {

class InfeasibleScenario : public DomainError {
public:
    using DomainError::DomainError;
};

/// A named set of parameter overrides applied on top of a base.
struct ScenarioSpec {
    std::string label;
    std::vector<std::pair<Param, double>> overrides;

    ModelParams apply(ModelParams base) const {
        for (const auto& [p, v] : overrides) base.set(p, v);
        return base;
    }
};

struct ScenarioRow {
    std::string label;
    ModelParams params;
    Indices indices;
    std::array<double, kIndexCount> delta{};
    /// Percentage change vs base; empty where the base index is zero.
    std::array<std::optional<double>, kIndexCount> delta_percent{};
};

struct ScenarioComparison {
    /// rows[0] is the base, re-simulated in the same call.
    std::vector<ScenarioRow> rows;
};

inline ScenarioComparison compare_scenarios(const ModelParams& base,
                                            const std::vector<ScenarioSpec>& scenarios,
                                            const SensitivityOptions& opt = {}) {
    require_valid(base);
    for (const auto& sc : scenarios) {
        const auto v = validate_params(sc.apply(base));
        if (!v.ok()) {
            std::string msg = "scenario '" + sc.label + "' is infeasible:";
            for (const auto& s : v.violations) msg += " [" + s + "]";
            throw InfeasibleScenario(msg);
        }
    }

    auto evaluate = [&](const std::string& label, const ModelParams& p) {
        ScenarioRow row;
        row.label = label;
        row.params = p;
        const auto init = make_initial_state(p, opt.f_pos0, opt.f_neu0, opt.f_neg0);
        row.indices = compute_indices(p, init, opt.horizon, opt.tol);
        return row;
    };

    ScenarioComparison out;
    out.rows.push_back(evaluate("base", base));
    for (const auto& sc : scenarios) out.rows.push_back(evaluate(sc.label, sc.apply(base)));

    const auto& ref = out.rows.front().indices;
    for (auto& row : out.rows) {
        for (std::size_t k = 0; k < kIndexCount; ++k) {
            row.delta[k] = row.indices.values[k] - ref.values[k];
            if (ref.values[k] != 0.0) row.delta_percent[k] = 100.0 * row.delta[k] / ref.values[k];
        }
    }
    return out;
}

} // namespace esfi
