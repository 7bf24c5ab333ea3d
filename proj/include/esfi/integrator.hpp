#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "esfi/errors.hpp"
#include "esfi/model.hpp"

namespace esfi {

inline constexpr double kDefaultTolerance = 1e-8;

struct TimeGrid {
    double t_start = 0.0;
    double t_end = 0.0;
    std::vector<double> output_times;

    /// Outputs at t_start, t_start + dt, ..., t_end (t_end always included).
    static TimeGrid uniform(double t_start, double t_end, double dt) {
        if (!(dt > 0.0) || !(t_end > t_start))
            throw DomainError("uniform grid requires dt > 0 and t_end > t_start");
        TimeGrid g{t_start, t_end, {}};
        const auto n = static_cast<std::size_t>(std::floor((t_end - t_start) / dt + 1e-9));
        g.output_times.reserve(n + 2);
        for (std::size_t k = 0; k <= n; ++k) g.output_times.push_back(t_start + dt * double(k));
        if (t_end - g.output_times.back() > 1e-9 * dt)
            g.output_times.push_back(t_end);
        else
            g.output_times.back() = t_end;
        return g;
    }

    static TimeGrid from_times(std::vector<double> times) {
        if (times.size() < 2) throw DomainError("time grid needs at least two output times");
        TimeGrid g{times.front(), times.back(), std::move(times)};
        g.validate();
        return g;
    }

    void validate() const {
        if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_start < t_end))
            throw DomainError("time grid requires finite t_start < t_end");
        if (output_times.empty()) throw DomainError("time grid has no output times");
        for (std::size_t k = 0; k < output_times.size(); ++k) {
            const double t = output_times[k];
            if (!(t >= t_start && t <= t_end))
                throw DomainError("output time " + std::to_string(t) + " outside [t_start, t_end]");
            if (k > 0 && !(t > output_times[k - 1]))
                throw DomainError("output times must be strictly increasing");
        }
    }
};

struct Trajectory {
    TimeGrid grid;
    std::vector<PopulationState> states;

    std::size_t size() const { return states.size(); }
    bool empty() const { return states.empty(); }
    double time(std::size_t k) const { return grid.output_times.at(k); }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    // fifth-order minus embedded fourth-order weights
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // continuous extension
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

using Vec = PopulationState::Vector;

inline double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double atol, double rtol) {
    double sum = 0.0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / sc;
        sum += r * r;
    }
    const double n = std::sqrt(sum / double(err.size()));
    return std::isfinite(n) ? n : std::numeric_limits<double>::infinity();
}

inline double initial_step(const Vec& y, const Vec& f, const ModelParams& p, double atol,
                           double rtol, double span) {
    Vec zero{};
    const double d0 = error_norm(y, zero, y, atol, rtol);
    const double d1 = error_norm(f, zero, y, atol, rtol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Vec y1{}, f1{};
    for (std::size_t i = 0; i < y.size(); ++i) y1[i] = y[i] + h0 * f[i];
    rhs_unchecked(y1, p, f1);
    Vec df{};
    for (std::size_t i = 0; i < y.size(); ++i) df[i] = f1[i] - f[i];
    const double d2 = error_norm(df, zero, y, atol, rtol) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, span});
}

} // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of the augmented system with
/// dense output at grid.output_times. `tol` is the relative tolerance; the
/// absolute tolerance is tol * N with N the initial total population.
inline Trajectory integrate(const ModelParams& params, const PopulationState& init,
                            const TimeGrid& grid, double tol = kDefaultTolerance) {
    using detail::DormandPrince;
    using Vec = PopulationState::Vector;

    require_valid(params);
    grid.validate();
    if (!(tol > 0.0) || !std::isfinite(tol)) throw DomainError("tolerance must be positive");
    Vec y = init.to_array();
    for (std::size_t k = 0; k < y.size(); ++k)
        if (!std::isfinite(y[k]) || y[k] < 0.0)
            throw DomainError("initial state field " + std::string(kStateFieldNames[k]) +
                              " must be finite and >= 0");

    const double population = std::max(conservation_total(init), 1.0);
    const double atol = tol * population;
    const double rtol = tol;
    const double negative_limit = 1e-9 * population;
    constexpr std::size_t kMaxSteps = 2'000'000;

    Trajectory traj{grid, {}};
    traj.states.reserve(grid.output_times.size());
    const auto& outs = grid.output_times;
    std::size_t next_out = 0;

    // Near-zero S and F wander at the atol scale once spreading stops, and the
    // interpolant can undershoot inside long tail steps. Move small deficits
    // into I so the population total is unchanged.
    const auto project = [](Vec& v) {
        bool moved = false;
        for (std::size_t k = 0; k < 4; ++k) {
            if (v[k] < 0.0 && v[4] >= -v[k]) {
                v[4] += v[k];
                v[k] = 0.0;
                moved = true;
            }
        }
        return moved;
    };
    auto emit = [&](const Vec& v) {
        Vec c = v;
        project(c);
        for (double& x : c)
            if (x < 0.0 && x >= -negative_limit) x = 0.0;
        // Cumulative counts cannot fall; hold round-off dips at the previous value.
        if (!traj.states.empty()) {
            const auto prev = traj.states.back().to_array();
            for (std::size_t k = 5; k < 8; ++k)
                if (c[k] < prev[k] && c[k] >= prev[k] - negative_limit) c[k] = prev[k];
        }
        traj.states.push_back(PopulationState::from_array(c));
    };

    double t = grid.t_start;
    while (next_out < outs.size() && outs[next_out] <= t) {
        emit(y);
        ++next_out;
    }

    Vec k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, tmp{}, y_new{}, err{};
    rhs_unchecked(y, params, k1);
    double h = detail::initial_step(y, k1, params, atol, rtol, grid.t_end - grid.t_start);
    bool last_rejected = false;
    std::size_t steps = 0;

    while (t < grid.t_end) {
        if (++steps > kMaxSteps) throw IntegrationError("maximum step count exceeded", t);
        bool final_step = false;
        if (t + h >= grid.t_end) {
            h = grid.t_end - t;
            final_step = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            std::ostringstream msg;
            msg << "step size underflow at t=" << t;
            throw IntegrationError(msg.str(), t);
        }

        const auto stage = [&](Vec& k, auto&&... terms) {
            for (std::size_t i = 0; i < y.size(); ++i) tmp[i] = y[i] + h * (0.0 + ... + terms(i));
            rhs_unchecked(tmp, params, k);
        };
        using D = DormandPrince;
        stage(k2, [&](std::size_t i) { return D::a21 * k1[i]; });
        stage(k3, [&](std::size_t i) { return D::a31 * k1[i] + D::a32 * k2[i]; });
        stage(k4, [&](std::size_t i) { return D::a41 * k1[i] + D::a42 * k2[i] + D::a43 * k3[i]; });
        stage(k5, [&](std::size_t i) {
            return D::a51 * k1[i] + D::a52 * k2[i] + D::a53 * k3[i] + D::a54 * k4[i];
        });
        stage(k6, [&](std::size_t i) {
            return D::a61 * k1[i] + D::a62 * k2[i] + D::a63 * k3[i] + D::a64 * k4[i] +
                   D::a65 * k5[i];
        });
        for (std::size_t i = 0; i < y.size(); ++i)
            y_new[i] = y[i] + h * (D::a71 * k1[i] + D::a73 * k3[i] + D::a74 * k4[i] +
                                   D::a75 * k5[i] + D::a76 * k6[i]);
        rhs_unchecked(y_new, params, k7);
        for (std::size_t i = 0; i < y.size(); ++i)
            err[i] = h * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] + D::e5 * k5[i] +
                          D::e6 * k6[i] + D::e7 * k7[i]);
        const double en = detail::error_norm(err, y, y_new, atol, rtol);

        if (en > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
            last_rejected = true;
            continue;
        }

        // A step that drives a component past the clamp threshold is retried
        // with a smaller step; persistent failure surfaces as step underflow.
        bool overshoot = false;
        for (std::size_t i = 0; i < y.size(); ++i) overshoot = overshoot || y_new[i] < -negative_limit;
        if (overshoot) {
            if (h <= 1e-12 * std::max(1.0, std::abs(t))) {
                std::ostringstream msg;
                msg << "state went negative beyond " << -negative_limit << " near t=" << t;
                throw IntegrationError(msg.str(), t);
            }
            h *= 0.5;
            last_rejected = true;
            continue;
        }

        const double t_new = final_step ? grid.t_end : t + h;
        if (next_out < outs.size() && outs[next_out] <= t_new) {
            Vec r5{};
            for (std::size_t i = 0; i < y.size(); ++i)
                r5[i] = h * (D::d1 * k1[i] + D::d3 * k3[i] + D::d4 * k4[i] + D::d5 * k5[i] +
                             D::d6 * k6[i] + D::d7 * k7[i]);
            while (next_out < outs.size() && outs[next_out] <= t_new) {
                const double to = outs[next_out];
                if (to == t_new) {
                    emit(y_new);
                } else {
                    const double s = (to - t) / h;
                    const double s1 = 1.0 - s;
                    Vec v{};
                    for (std::size_t i = 0; i < y.size(); ++i) {
                        const double ydiff = y_new[i] - y[i];
                        const double bspl = h * k1[i] - ydiff;
                        const double r4 = ydiff - h * k7[i] - bspl;
                        v[i] = y[i] + s * (ydiff + s1 * (bspl + s * (r4 + s1 * r5[i])));
                    }
                    emit(v);
                }
                ++next_out;
            }
        }

        t = t_new;
        y = y_new;
        k1 = k7;
        if (project(y)) rhs_unchecked(y, params, k1);
        double factor = en == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
        if (last_rejected) factor = std::min(1.0, factor);
        h *= factor;
        last_rejected = false;
    }
    return traj;
}

struct Peak {
    double time = 0.0;
    double value = 0.0;
};

/// Largest instantaneous forwarder count on the output grid (earliest on ties).
inline Peak peak_instantaneous(const Trajectory& traj, Emotion emotion) {
    if (traj.empty()) throw DomainError("peak of an empty trajectory");
    Peak best{traj.time(0), traj.states[0].forwarders(emotion)};
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double v = traj.states[k].forwarders(emotion);
        if (v > best.value) best = {traj.time(k), v};
    }
    return best;
}

/// max(F) at the final time divided by the trajectory-wide peak of max(F).
/// Zero when no forwarders were ever active.
inline double residual_active_fraction(const Trajectory& traj) {
    if (traj.empty()) throw DomainError("stability of an empty trajectory");
    auto active = [](const PopulationState& s) { return std::max({s.f_pos, s.f_neu, s.f_neg}); };
    double peak = 0.0;
    for (const auto& s : traj.states) peak = std::max(peak, active(s));
    if (peak <= 0.0) return 0.0;
    return active(traj.states.back()) / peak;
}

inline constexpr double kStableFraction = 1e-3;

/// Plateau value of the cumulative series. Throws NotStableError if forwarders
/// have not decayed below 1e-3 of their peak by the final time.
inline double stable_cumulative(const Trajectory& traj, Emotion emotion) {
    const double frac = residual_active_fraction(traj);
    if (!(frac < kStableFraction)) {
        std::ostringstream msg;
        msg << "cumulative series not yet stable: active fraction " << frac << " at t="
            << traj.grid.output_times.back();
        throw NotStableError(msg.str(), frac);
    }
    return traj.states.back().cumulative(emotion);
}

} // namespace esfi
