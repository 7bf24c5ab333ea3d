#pragma once

// Latin hypercube sampling, the six propagation indices, partial rank
// correlation (PRCC) and parameter sweeps.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "esfi/calibration.hpp"
#include "esfi/errors.hpp"
#include "esfi/integrator.hpp"
#include "esfi/model.hpp"
#include "esfi/parallel.hpp"
#include "esfi/random.hpp"
#include "esfi/rank_stats.hpp"

namespace esfi {

using ParameterRanges = ParamBounds;

/// [v(1-spread), v(1+spread)] around each base value; probabilities are
/// capped at 1.
inline ParameterRanges ranges_around(const ModelParams& base, double spread = 0.5) {
    if (!(spread >= 0.0) || !(spread < 1.0)) throw DomainError("spread must lie in [0, 1)");
    ParameterRanges r{};
    for (Param p : kParams) {
        const double v = base.get(p);
        double hi = v * (1.0 + spread);
        if (is_probability(p)) hi = std::min(hi, 1.0);
        bound_of(r, p) = {v * (1.0 - spread), hi};
    }
    return r;
}

inline void validate_ranges(const ParameterRanges& ranges) {
    for (Param p : kParams) {
        const auto& b = bound_of(ranges, p);
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || b.lo < 0.0 || b.lo > b.hi)
            throw DomainError("invalid range for " + std::string(param_name(p)) +
                              ": need 0 <= lo <= hi");
        if (is_probability(p) && b.hi > 1.0)
            throw DomainError("range for " + std::string(param_name(p)) + " exceeds 1");
    }
}

struct SampleMatrix {
    std::uint64_t seed = 0;
    std::vector<std::array<double, kParamCount>> rows;

    std::size_t size() const { return rows.size(); }

    std::vector<double> column(Param p) const {
        std::vector<double> c;
        c.reserve(rows.size());
        for (const auto& r : rows) c.push_back(r[static_cast<std::size_t>(p)]);
        return c;
    }

    ModelParams params(std::size_t k) const { return ModelParams::from_array(rows.at(k)); }
};

/// Latin hypercube draw: per column, one uniform point in each of n equal
/// strata, strata independently permuted. Rows violating the coupled
/// probability constraints are shrunk proportionally onto the feasible set.
inline SampleMatrix lhs_sample(const ParameterRanges& ranges, std::size_t n, std::uint64_t seed) {
    validate_ranges(ranges);
    if (n < 2) throw DomainError("Latin hypercube needs n >= 2");
    SampleMatrix m;
    m.seed = seed;
    m.rows.assign(n, {});
    Rng rng(seed);
    std::vector<std::size_t> perm(n);
    for (Param p : kParams) {
        const auto& b = bound_of(ranges, p);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (double(perm[i]) + rng.uniform()) / double(n);
            m.rows[i][static_cast<std::size_t>(p)] = b.lo + (b.hi - b.lo) * u;
        }
    }
    for (auto& row : m.rows) row = project_probabilities(ModelParams::from_array(row)).to_array();
    return m;
}

enum class IndexId { FPosMax = 0, FNeuMax, FNegMax, CPosStable, CNeuStable, CNegStable };

inline constexpr std::size_t kIndexCount = 6;

inline constexpr std::array<IndexId, kIndexCount> kIndices{
    IndexId::FPosMax,    IndexId::FNeuMax,    IndexId::FNegMax,
    IndexId::CPosStable, IndexId::CNeuStable, IndexId::CNegStable};

inline constexpr std::string_view index_name(IndexId id) {
    constexpr std::array<std::string_view, kIndexCount> names{
        "F_pos_max", "F_neu_max", "F_neg_max", "C_pos_s", "C_neu_s", "C_neg_s"};
    return names[static_cast<std::size_t>(id)];
}

inline std::optional<IndexId> index_from_name(std::string_view name) {
    for (IndexId id : kIndices)
        if (index_name(id) == name) return id;
    return std::nullopt;
}

inline constexpr IndexId peak_index(Emotion e) {
    return static_cast<IndexId>(static_cast<int>(e));
}
inline constexpr IndexId stable_index(Emotion e) {
    return static_cast<IndexId>(3 + static_cast<int>(e));
}

struct Indices {
    std::array<double, kIndexCount> values{};
    /// False when forwarders were still active at the longest horizon tried;
    /// the C values are then the last computed cumulatives.
    bool stable = true;
    double residual_active_fraction = 0.0;
    double t_end = 0.0;

    double operator[](IndexId id) const { return values[static_cast<std::size_t>(id)]; }
};

inline constexpr int kMaxHorizonDoublings = 3; // up to 8x the requested horizon

/// Peak forwarders and plateau cumulatives per emotion. If the cumulative
/// series has not settled by the horizon end, t_end is doubled (up to 8x),
/// keeping the output spacing.
inline Indices compute_indices(const ModelParams& params, const PopulationState& init,
                               const TimeGrid& horizon, double tol = kDefaultTolerance) {
    require_valid(params);
    horizon.validate();
    TimeGrid grid = horizon;
    const double spacing = grid.output_times.size() > 1
                               ? (grid.t_end - grid.t_start) / double(grid.output_times.size() - 1)
                               : grid.t_end - grid.t_start;
    for (int attempt = 0;; ++attempt) {
        const auto traj = integrate(params, init, grid, tol);
        const double frac = residual_active_fraction(traj);
        const bool stable = frac < kStableFraction;
        if (stable || attempt == kMaxHorizonDoublings) {
            Indices out;
            for (Emotion e : kEmotions) {
                out.values[static_cast<std::size_t>(peak_index(e))] = peak_instantaneous(traj, e).value;
                out.values[static_cast<std::size_t>(stable_index(e))] = traj.states.back().cumulative(e);
            }
            out.stable = stable;
            out.residual_active_fraction = frac;
            out.t_end = grid.t_end;
            return out;
        }
        const double t_end = grid.t_start + 2.0 * (grid.t_end - grid.t_start);
        grid = TimeGrid::uniform(grid.t_start, t_end, spacing);
    }
}

enum class Strength { Strong, Median, Weak };

inline constexpr std::string_view strength_name(Strength s) {
    switch (s) {
    case Strength::Strong: return "strong";
    case Strength::Median: return "median";
    case Strength::Weak: return "weak";
    }
    return "?";
}

inline constexpr double kStrongThreshold = 0.4;
inline constexpr double kMedianThreshold = 0.2;

inline Strength classify_correlation(double value) {
    if (!(std::abs(value) <= 1.0)) throw DomainError("correlation magnitude exceeds 1");
    const double a = std::abs(value);
    if (a >= kStrongThreshold) return Strength::Strong;
    if (a >= kMedianThreshold) return Strength::Median;
    return Strength::Weak;
}

namespace detail {

inline double prcc_from_ranks(const std::array<std::vector<double>, kParamCount>& col_ranks,
                              const std::vector<double>& out_ranks, std::size_t target) {
    if (stats::is_constant(col_ranks[target]))
        throw UndefinedCorrelation("PRCC undefined: parameter " +
                                   std::string(param_name(kParams[target])) + " is constant");
    if (stats::is_constant(out_ranks)) throw UndefinedCorrelation("PRCC undefined: output is constant");
    std::vector<std::vector<double>> others;
    others.reserve(kParamCount - 1);
    for (std::size_t j = 0; j < kParamCount; ++j)
        if (j != target) others.push_back(col_ranks[j]);
    const auto rx = stats::regression_residual(col_ranks[target], others);
    const auto ry = stats::regression_residual(out_ranks, others);
    return stats::pearson(rx, ry);
}

inline std::array<std::vector<double>, kParamCount> column_ranks(const SampleMatrix& samples) {
    std::array<std::vector<double>, kParamCount> r;
    for (Param p : kParams) r[static_cast<std::size_t>(p)] = stats::average_ranks(samples.column(p));
    return r;
}

} // namespace detail

/// Partial rank correlation between one parameter column and the outputs,
/// controlling linearly (on ranks) for the other seven columns.
inline double prcc(const SampleMatrix& samples, std::span<const double> outputs, Param target) {
    if (outputs.size() != samples.size()) throw DomainError("PRCC: outputs length differs from samples");
    if (samples.size() <= 10) throw DomainError("PRCC needs more than 10 samples");
    const auto ranks = detail::column_ranks(samples);
    return detail::prcc_from_ranks(ranks, stats::average_ranks(outputs),
                                   static_cast<std::size_t>(target));
}

struct SensitivityOptions {
    double f_pos0 = 68.0;
    double f_neu0 = 40.0;
    double f_neg0 = 265.0;
    TimeGrid horizon = TimeGrid::uniform(0.0, 60.0, 0.1);
    double tol = kDefaultTolerance;
    unsigned workers = 0;
};

struct PrccEntry {
    std::optional<double> value; // empty when undefined (constant column/output)
    std::optional<Strength> strength;
};

struct SensitivityReport {
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    ParameterRanges ranges{};
    std::size_t failed_samples = 0;
    std::vector<std::string> failures;
    /// entries[param][index]
    std::array<std::array<PrccEntry, kIndexCount>, kParamCount> entries{};

    const PrccEntry& at(Param p, IndexId i) const {
        return entries[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)];
    }
};

/// Failure budget: runs with at least this fraction of failed samples abort.
inline constexpr double kMaxFailureFraction = 0.01;

/// lhs_sample -> compute_indices per row (in parallel) -> PRCC per
/// (parameter, index). Samples whose integration fails or never settles are
/// dropped if they are fewer than 1% of the total.
inline SensitivityReport sensitivity_run(const ModelParams& base, const ParameterRanges& ranges,
                                         std::size_t n, std::uint64_t seed,
                                         const SensitivityOptions& opt = {}) {
    require_valid(base);
    const auto samples = lhs_sample(ranges, n, seed);

    std::vector<std::optional<Indices>> results(n);
    std::vector<std::string> errors(n);
    parallel_for(n, opt.workers, [&](std::size_t k) {
        try {
            const auto p = samples.params(k);
            const auto init = make_initial_state(p, opt.f_pos0, opt.f_neu0, opt.f_neg0);
            auto ind = compute_indices(p, init, opt.horizon, opt.tol);
            if (!ind.stable) {
                std::ostringstream msg;
                msg << "not stable by t=" << ind.t_end << " (active fraction "
                    << ind.residual_active_fraction << ")";
                errors[k] = msg.str();
                return;
            }
            results[k] = ind;
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    });

    SensitivityReport rep;
    rep.n_samples = n;
    rep.seed = seed;
    rep.ranges = ranges;
    SampleMatrix kept;
    kept.seed = seed;
    std::vector<std::size_t> kept_idx;
    for (std::size_t k = 0; k < n; ++k) {
        if (results[k]) {
            kept.rows.push_back(samples.rows[k]);
            kept_idx.push_back(k);
        } else {
            ++rep.failed_samples;
            rep.failures.push_back("sample " + std::to_string(k) + ": " + errors[k]);
        }
    }
    if (double(rep.failed_samples) >= kMaxFailureFraction * double(n) && rep.failed_samples > 0) {
        std::ostringstream msg;
        msg << rep.failed_samples << " of " << n << " samples failed; first: " << rep.failures.front();
        throw AnalysisError(msg.str());
    }
    if (kept.size() <= 10) throw AnalysisError("too few usable samples for PRCC");

    const auto ranks = detail::column_ranks(kept);
    for (IndexId id : kIndices) {
        std::vector<double> out;
        out.reserve(kept_idx.size());
        for (std::size_t k : kept_idx) out.push_back((*results[k])[id]);
        const auto out_ranks = stats::average_ranks(out);
        for (Param p : kParams) {
            auto& entry = rep.entries[static_cast<std::size_t>(p)][static_cast<std::size_t>(id)];
            try {
                const double v = detail::prcc_from_ranks(ranks, out_ranks, static_cast<std::size_t>(p));
                entry.value = v;
                entry.strength = classify_correlation(v);
            } catch (const UndefinedCorrelation&) {
                entry = {};
            }
        }
    }
    return rep;
}

struct SweepResult {
    std::vector<Param> vary;
    std::vector<std::vector<double>> grids;
    IndexId index = IndexId::CNegStable;
    /// Row-major over grids (last varied parameter fastest); empty entries are
    /// infeasible or unsettled grid points.
    std::vector<std::optional<double>> values;

    std::vector<std::size_t> shape() const {
        std::vector<std::size_t> s;
        for (const auto& g : grids) s.push_back(g.size());
        return s;
    }
};

/// Evaluates one index over the Cartesian product of up to three parameter
/// grids, all other parameters held at `base`.
inline SweepResult sweep_grid(const ModelParams& base, const std::vector<Param>& vary,
                              const std::vector<std::vector<double>>& grids, IndexId index,
                              const SensitivityOptions& opt = {}) {
    if (vary.empty() || vary.size() > 3) throw DomainError("sweep varies 1 to 3 parameters");
    if (grids.size() != vary.size()) throw DomainError("one grid per varied parameter");
    for (std::size_t a = 0; a < vary.size(); ++a) {
        if (grids[a].empty()) throw DomainError("empty sweep grid");
        for (std::size_t b = a + 1; b < vary.size(); ++b)
            if (vary[a] == vary[b]) throw DomainError("parameter varied twice");
    }
    SweepResult res{vary, grids, index, {}};
    std::size_t total = 1;
    for (const auto& g : grids) total *= g.size();
    res.values.assign(total, std::nullopt);

    parallel_for(total, opt.workers, [&](std::size_t flat) {
        ModelParams p = base;
        std::size_t rem = flat;
        for (std::size_t a = vary.size(); a-- > 0;) {
            p.set(vary[a], grids[a][rem % grids[a].size()]);
            rem /= grids[a].size();
        }
        if (!validate_params(p)) return;
        try {
            const auto init = make_initial_state(p, opt.f_pos0, opt.f_neu0, opt.f_neg0);
            const auto ind = compute_indices(p, init, opt.horizon, opt.tol);
            const bool needs_stability = static_cast<int>(index) >= 3;
            if (needs_stability && !ind.stable) return;
            res.values[flat] = ind[index];
        } catch (const std::exception&) {
        }
    });
    return res;
}

} // namespace esfi
