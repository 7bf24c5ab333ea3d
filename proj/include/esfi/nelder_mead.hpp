#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "esfi/errors.hpp"

namespace esfi {

struct NelderMeadOptions {
    std::size_t max_iterations = 5000;
    /// Stop when (f_worst - f_best) <= ftol * |f_best| + abs_ftol.
    double ftol = 1e-10;
    double abs_ftol = 0.0;
    /// Stop when every vertex is within xtol of the best one (max-norm).
    double xtol = 1e-10;
    double initial_step = 0.5;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    /// Best objective after each iteration; non-increasing.
    std::vector<double> history;
};

/// Unconstrained downhill simplex with dimension-adaptive coefficients.
/// Non-finite objective values are treated as +infinity.
template <class Objective>
NelderMeadResult nelder_mead(Objective&& objective, std::vector<double> x0,
                             const NelderMeadOptions& opt = {}) {
    const std::size_t n = x0.size();
    NelderMeadResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double f = objective(x);
        return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
    };
    if (n == 0) {
        res.x = std::move(x0);
        res.f = eval(res.x);
        res.converged = true;
        return res;
    }

    const double dn = double(n);
    const double alpha = 1.0;
    const double gamma = 1.0 + 2.0 / dn;
    const double rho = 0.75 - 1.0 / (2.0 * dn);
    const double sigma = 1.0 - 1.0 / dn;

    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opt.initial_step;
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);

    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> s2(n + 1);
        std::vector<double> f2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            s2[i] = std::move(simplex[order[i]]);
            f2[i] = fv[order[i]];
        }
        simplex = std::move(s2);
        fv = std::move(f2);
    };
    auto converged = [&] {
        const double spread = fv[n] - fv[0];
        if (std::isfinite(spread) && spread <= opt.ftol * std::abs(fv[0]) + opt.abs_ftol) return true;
        double diam = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                diam = std::max(diam, std::abs(simplex[i][j] - simplex[0][j]));
        return diam <= opt.xtol;
    };
    auto affine = [&](std::vector<double>& out, double t) {
        // centroid + t * (centroid - worst)
        for (std::size_t j = 0; j < n; ++j)
            out[j] = centroid[j] + t * (centroid[j] - simplex[n][j]);
    };

    sort_simplex();
    while (res.iterations < opt.max_iterations) {
        if (converged()) {
            res.converged = true;
            break;
        }
        ++res.iterations;
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / dn;

        affine(xr, alpha);
        const double fr = eval(xr);
        bool shrink = false;
        if (fr < fv[0]) {
            affine(xe, gamma);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            simplex[n] = xr;
            fv[n] = fr;
        } else if (fr < fv[n]) {
            affine(xc, alpha * rho);
            const double fc = eval(xc);
            if (fc <= fr) {
                simplex[n] = xc;
                fv[n] = fc;
            } else {
                shrink = true;
            }
        } else {
            affine(xc, -rho);
            const double fc = eval(xc);
            if (fc < fv[n]) {
                simplex[n] = xc;
                fv[n] = fc;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (std::size_t i = 1; i <= n; ++i) {
                for (std::size_t j = 0; j < n; ++j)
                    simplex[i][j] = simplex[0][j] + sigma * (simplex[i][j] - simplex[0][j]);
                fv[i] = eval(simplex[i]);
            }
        }
        sort_simplex();
        res.history.push_back(fv[0]);
    }
    if (!res.converged && converged()) res.converged = true;
    res.x = simplex[0];
    res.f = fv[0];
    return res;
}

} // namespace esfi
