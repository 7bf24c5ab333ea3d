#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "esfi/errors.hpp"

namespace esfi::stats {

/// 1-based ranks; tied values share the average of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && x[idx[j]] == x[idx[i]]) ++j;
        const double avg = 0.5 * double(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) r[idx[k]] = avg;
        i = j;
    }
    return r;
}

inline double mean(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
}

inline std::vector<double> centered(std::span<const double> x) {
    const double m = mean(x);
    std::vector<double> c(x.begin(), x.end());
    for (double& v : c) v -= m;
    return c;
}

inline bool is_constant(std::span<const double> x) {
    return std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
}

/// Pearson correlation; throws UndefinedCorrelation when either vector has
/// zero variance.
inline double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw DomainError("pearson: size mismatch");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double da = a[k] - ma, db = b[k] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) throw UndefinedCorrelation("correlation of a constant vector");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// Residual of the least-squares fit of `y` on the columns of `regressors`
/// (plus an intercept). All inputs are centred first, so the intercept drops
/// out; the normal equations carry a small ridge so constant regressors are
/// harmless.
inline std::vector<double> regression_residual(std::span<const double> y,
                                               const std::vector<std::vector<double>>& regressors,
                                               double ridge = 1e-10) {
    const std::size_t n = y.size();
    const std::size_t m = regressors.size();
    std::vector<std::vector<double>> xc;
    xc.reserve(m);
    for (const auto& col : regressors) {
        if (col.size() != n) throw DomainError("regression: column length mismatch");
        xc.push_back(centered(col));
    }
    std::vector<double> yc = centered(y);

    // normal equations (X'X + ridge I) b = X'y, solved by Cholesky
    std::vector<double> a(m * m, 0.0), rhs(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += xc[i][k] * xc[j][k];
            a[i * m + j] = a[j * m + i] = s;
        }
        a[i * m + i] += ridge;
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += xc[i][k] * yc[k];
        rhs[i] = s;
    }
    std::vector<double> l(m * m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double d = a[j * m + j];
        for (std::size_t k = 0; k < j; ++k) d -= l[j * m + k] * l[j * m + k];
        if (!(d > 0.0)) throw DomainError("regression: normal matrix not positive definite");
        l[j * m + j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < m; ++i) {
            double s = a[i * m + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * m + k] * l[j * m + k];
            l[i * m + j] = s / l[j * m + j];
        }
    }
    std::vector<double> z(m), b(m);
    for (std::size_t i = 0; i < m; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * m + k] * z[k];
        z[i] = s / l[i * m + i];
    }
    for (std::size_t i = m; i-- > 0;) {
        double s = z[i];
        for (std::size_t k = i + 1; k < m; ++k) s -= l[k * m + i] * b[k];
        b[i] = s / l[i * m + i];
    }
    for (std::size_t k = 0; k < n; ++k) {
        double fit = 0.0;
        for (std::size_t i = 0; i < m; ++i) fit += b[i] * xc[i][k];
        yc[k] -= fit;
    }
    return yc;
}

} // namespace esfi::stats
