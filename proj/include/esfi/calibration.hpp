#pragma once

// Least-squares calibration of the eight model parameters against observed
// cumulative forwarding series.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "esfi/dataset.hpp"
#include "esfi/errors.hpp"
#include "esfi/integrator.hpp"
#include "esfi/model.hpp"
#include "esfi/nelder_mead.hpp"
#include "esfi/parallel.hpp"
#include "esfi/random.hpp"

namespace esfi {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
    bool operator==(const Interval&) const = default;
};

using ParamBounds = std::array<Interval, kParamCount>;

inline Interval& bound_of(ParamBounds& b, Param p) { return b[static_cast<std::size_t>(p)]; }
inline const Interval& bound_of(const ParamBounds& b, Param p) {
    return b[static_cast<std::size_t>(p)];
}

/// beta in [1e-8, 1e-2], probabilities in [1e-6, 0.5], alphas in [1e-3, 5],
/// S0 in [final total forwards, 1e7].
inline ParamBounds default_fit_bounds(const ObservedDataset& ds) {
    ParamBounds b{};
    bound_of(b, Param::Beta) = {1e-8, 1e-2};
    for (Param p : {Param::PPlus, Param::PZero, Param::PMinus}) bound_of(b, p) = {1e-6, 0.5};
    for (Param p : {Param::AlphaPos, Param::AlphaNeu, Param::AlphaNeg}) bound_of(b, p) = {1e-3, 5.0};
    bound_of(b, Param::SZero) = {std::max(ds.final_total(), 1.0), 1e7};
    return b;
}

inline ModelParams default_initial_guess(const ObservedDataset& ds) {
    ModelParams m;
    m.beta = 1e-5;
    m.p_plus = 0.05;
    m.p_zero = 0.005;
    m.p_minus = 0.005;
    m.alpha_pos = m.alpha_neu = m.alpha_neg = 0.5;
    m.s_zero = 10.0 * ds.final_total();
    return m;
}

struct FitConfig {
    /// Simplex iterations per start (summed over its internal re-inflations).
    std::size_t max_iterations = 6000;
    /// Relative objective spread at which a simplex run is considered converged.
    double convergence_tol = 1e-10;
    /// Additional jittered starts beyond the initial guess.
    unsigned restarts = 8;
    std::uint64_t seed = 1;
    /// Defaults to default_fit_bounds(dataset). An interval with lo == hi
    /// pins that parameter.
    std::optional<ParamBounds> bounds;
    double integration_tol = kDefaultTolerance;
    unsigned workers = 0;
};

struct FitResult {
    ModelParams params;
    double objective = 0.0;
    std::array<double, 3> per_series_rmse{};
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::array<std::vector<double>, 3> residual_series;
    /// Best objective after each simplex iteration of the winning start.
    std::vector<double> objective_history;
    std::size_t winning_start = 0;
    std::string message;
};

/// Model cumulative series at the dataset's sample times, started from
/// make_initial_state with the dataset's first row as initial forwarders.
inline std::array<std::vector<double>, 3> simulate_observed(const ModelParams& params,
                                                            const ObservedDataset& ds,
                                                            double tol = kDefaultTolerance) {
    const auto init = make_initial_state(params, ds.c_pos.front(), ds.c_neu.front(), ds.c_neg.front());
    const auto traj = integrate(params, init, TimeGrid::from_times(ds.times()), tol);
    std::array<std::vector<double>, 3> out;
    for (Emotion e : kEmotions) {
        auto& s = out[static_cast<std::size_t>(e)];
        s.reserve(traj.size());
        for (const auto& st : traj.states) s.push_back(st.cumulative(e));
    }
    return out;
}

/// Sum over samples and emotions of (model - observed)^2.
inline double ls_error(const ModelParams& params, const ObservedDataset& ds,
                       double tol = kDefaultTolerance) {
    require_valid(params);
    ds.validate();
    std::array<std::vector<double>, 3> model;
    try {
        model = simulate_observed(params, ds, tol);
    } catch (const IntegrationError& e) {
        std::ostringstream msg;
        msg << e.what() << " (beta=" << params.beta << ", p_plus=" << params.p_plus
            << ", p_zero=" << params.p_zero << ", p_minus=" << params.p_minus
            << ", alpha_pos=" << params.alpha_pos << ", alpha_neu=" << params.alpha_neu
            << ", alpha_neg=" << params.alpha_neg << ", s_zero=" << params.s_zero << ")";
        throw IntegrationError(msg.str(), e.last_good_time());
    }
    double sum = 0.0;
    for (Emotion e : kEmotions) {
        const auto& obs = ds.series(e);
        const auto& mod = model[static_cast<std::size_t>(e)];
        for (std::size_t k = 0; k < obs.size(); ++k) {
            const double r = mod[k] - obs[k];
            sum += r * r;
        }
    }
    return sum;
}

/// Maps unconstrained coordinates onto the bounded parameter box: a logistic
/// squash onto [0, 1], then linear (probabilities) or logarithmic (rates and
/// S0) interpolation between the bounds. Pinned parameters take no coordinate.
class ParamTransform {
public:
    explicit ParamTransform(const ParamBounds& bounds) : bounds_(bounds) {
        for (Param p : kParams) {
            const auto& b = bound_of(bounds_, p);
            if (!(b.lo <= b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi) || b.lo < 0.0)
                throw DomainError("invalid bounds for " + std::string(param_name(p)));
            if (b.lo < b.hi)
                free_.push_back(p);
            else
                pinned_.set(p, b.lo);
        }
    }

    std::size_t dimension() const { return free_.size(); }
    const std::vector<Param>& free_params() const { return free_; }

    ModelParams decode(const std::vector<double>& z) const {
        ModelParams m = pinned_;
        for (std::size_t k = 0; k < free_.size(); ++k) {
            const Param p = free_[k];
            const auto& b = bound_of(bounds_, p);
            const double u = 1.0 / (1.0 + std::exp(-z[k]));
            double v;
            if (log_scaled(p))
                v = b.lo * std::exp(u * std::log(b.hi / b.lo));
            else
                v = b.lo + u * (b.hi - b.lo);
            m.set(p, std::clamp(v, b.lo, b.hi));
        }
        return m;
    }

    std::vector<double> encode(const ModelParams& m) const {
        std::vector<double> z;
        z.reserve(free_.size());
        for (Param p : free_) {
            const auto& b = bound_of(bounds_, p);
            const double v = std::clamp(m.get(p), b.lo, b.hi);
            double u = log_scaled(p) ? std::log(v / b.lo) / std::log(b.hi / b.lo)
                                     : (v - b.lo) / (b.hi - b.lo);
            u = std::clamp(u, 1e-9, 1.0 - 1e-9);
            z.push_back(std::log(u / (1.0 - u)));
        }
        return z;
    }

private:
    bool log_scaled(Param p) const {
        return !is_probability(p) && bound_of(bounds_, p).lo > 0.0;
    }

    ParamBounds bounds_;
    std::vector<Param> free_;
    ModelParams pinned_;
};

inline constexpr double kFeasibilityPenalty = 1e6;

namespace detail {

struct StartOutcome {
    std::vector<double> z;
    double f = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::vector<double> history;
};

template <class Objective>
StartOutcome run_start(Objective& objective, std::vector<double> z0, const FitConfig& cfg) {
    StartOutcome out;
    out.z = std::move(z0);
    out.f = objective(out.z);
    ++out.evaluations;
    // Re-inflate the simplex around the incumbent until a fresh run no longer
    // improves it; guards against premature collapse.
    constexpr int kMaxInflations = 8;
    for (int round = 0; round < kMaxInflations; ++round) {
        if (out.iterations >= cfg.max_iterations) break;
        NelderMeadOptions opt;
        opt.max_iterations = cfg.max_iterations - out.iterations;
        opt.ftol = cfg.convergence_tol;
        opt.initial_step = round == 0 ? 0.5 : 0.25;
        auto r = nelder_mead(objective, out.z, opt);
        out.iterations += r.iterations;
        out.evaluations += r.evaluations;
        for (double h : r.history)
            out.history.push_back(out.history.empty() ? std::min(h, out.f)
                                                      : std::min(h, out.history.back()));
        const double before = out.f;
        if (r.f < out.f) {
            out.f = r.f;
            out.z = r.x;
        }
        out.converged = r.converged;
        if (!r.converged) break;
        if (!(before - out.f > cfg.convergence_tol * std::abs(out.f))) break;
    }
    return out;
}

} // namespace detail

/// Multi-start bounded Nelder-Mead minimisation of ls_error. Coupled
/// probability constraints are handled by evaluating at the proportionally
/// projected point plus a quadratic penalty on the violation, so every
/// candidate and the returned parameters are feasible.
inline FitResult fit(const ObservedDataset& ds, const FitConfig& config,
                     const ModelParams& initial_guess) {
    ds.validate();
    require_valid(initial_guess);
    const ParamBounds bounds = config.bounds ? *config.bounds : default_fit_bounds(ds);
    const ParamTransform transform(bounds);

    auto objective = [&](const std::vector<double>& z) {
        const ModelParams raw = transform.decode(z);
        const double violation = probability_violation(raw);
        const ModelParams feasible = project_probabilities(raw);
        try {
            return ls_error(feasible, ds, config.integration_tol) +
                   kFeasibilityPenalty * violation * violation;
        } catch (const IntegrationError&) {
            return std::numeric_limits<double>::infinity();
        } catch (const DomainError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    const std::size_t starts = std::size_t(config.restarts) + 1;
    std::vector<detail::StartOutcome> outcomes(starts);
    const std::vector<double> z_guess = transform.encode(initial_guess);
    parallel_for(starts, config.workers, [&](std::size_t s) {
        std::vector<double> z0 = z_guess;
        if (s > 0) {
            Rng rng(config.seed * 0x9E3779B97F4A7C15ULL + s);
            for (double& v : z0) v += 3.0 * (rng.uniform() - 0.5);
        }
        auto local_objective = objective;
        outcomes[s] = detail::run_start(local_objective, std::move(z0), config);
    });

    std::size_t best = 0;
    for (std::size_t s = 1; s < starts; ++s)
        if (outcomes[s].f < outcomes[best].f) best = s;
    const auto& win = outcomes[best];

    FitResult result;
    result.winning_start = best;
    for (const auto& o : outcomes) result.evaluations += o.evaluations;
    result.iterations = win.iterations;
    result.objective_history = win.history;

    const double guess_objective = ls_error(initial_guess, ds, config.integration_tol);
    ModelParams chosen = project_probabilities(transform.decode(win.z));
    double chosen_objective = std::numeric_limits<double>::infinity();
    if (std::isfinite(win.f)) {
        try {
            chosen_objective = ls_error(chosen, ds, config.integration_tol);
        } catch (const std::exception&) {
        }
    }
    if (!(chosen_objective <= guess_objective)) {
        result.params = initial_guess;
        result.objective = guess_objective;
        result.converged = false;
        result.message = "no start improved on the initial guess";
    } else {
        result.params = chosen;
        result.objective = chosen_objective;
        result.converged = win.converged;
        if (!win.converged) {
            std::ostringstream msg;
            msg << "iteration budget (" << config.max_iterations
                << ") exhausted before the simplex converged";
            result.message = msg.str();
        }
    }

    const auto model = simulate_observed(result.params, ds, config.integration_tol);
    for (Emotion e : kEmotions) {
        const auto idx = static_cast<std::size_t>(e);
        const auto& obs = ds.series(e);
        auto& res = result.residual_series[idx];
        res.resize(obs.size());
        double sq = 0.0;
        for (std::size_t k = 0; k < obs.size(); ++k) {
            res[k] = model[idx][k] - obs[k];
            sq += res[k] * res[k];
        }
        result.per_series_rmse[idx] = std::sqrt(sq / double(obs.size()));
    }
    return result;
}

inline FitResult fit(const ObservedDataset& ds, const FitConfig& config = {}) {
    return fit(ds, config, default_initial_guess(ds));
}

struct ResidualReport {
    /// model - observed, per emotion, per sample.
    std::array<std::vector<double>, 3> residuals;
    std::array<double, 3> max_abs{};
    std::array<double, 3> rmse{};
};

inline ResidualReport residual_report(const FitResult& result, const ObservedDataset& ds,
                                      double tol = kDefaultTolerance) {
    ds.validate();
    for (const auto& r : result.residual_series)
        if (!r.empty() && r.size() != ds.size())
            throw DomainError("fit result has " + std::to_string(r.size()) +
                              " residuals but dataset has " + std::to_string(ds.size()) + " samples");
    const auto model = simulate_observed(result.params, ds, tol);
    ResidualReport rep;
    for (Emotion e : kEmotions) {
        const auto idx = static_cast<std::size_t>(e);
        const auto& obs = ds.series(e);
        auto& res = rep.residuals[idx];
        res.resize(obs.size());
        double sq = 0.0, mx = 0.0;
        for (std::size_t k = 0; k < obs.size(); ++k) {
            res[k] = model[idx][k] - obs[k];
            sq += res[k] * res[k];
            mx = std::max(mx, std::abs(res[k]));
        }
        rep.max_abs[idx] = mx;
        rep.rmse[idx] = std::sqrt(sq / double(obs.size()));
    }
    return rep;
}

} // namespace esfi
