#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "esfi/report.hpp"
#include "esfi/sensitivity.hpp"

using namespace esfi;

namespace {

ParameterRanges unit_ranges() {
    ParameterRanges r{};
    for (Param p : kParams) bound_of(r, p) = {0.0, 1.0};
    // keep the probabilities feasible so no row is projected
    bound_of(r, Param::PPlus) = {0.0, 0.3};
    bound_of(r, Param::PZero) = {0.0, 0.3};
    bound_of(r, Param::PMinus) = {0.0, 0.3};
    return r;
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform();
    return v;
}

} // namespace

TEST(Lhs, TwoSamplesSplitTheInterval) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto s = lhs_sample(unit_ranges(), 2, seed);
        auto c = s.column(Param::Beta);
        std::sort(c.begin(), c.end());
        EXPECT_GE(c[0], 0.0);
        EXPECT_LT(c[0], 0.5);
        EXPECT_GE(c[1], 0.5);
        EXPECT_LE(c[1], 1.0);
    }
}

TEST(Lhs, SameSeedSameMatrix) {
    const auto a = lhs_sample(unit_ranges(), 100, 9);
    const auto b = lhs_sample(unit_ranges(), 100, 9);
    EXPECT_EQ(a.rows, b.rows);
    EXPECT_NE(a.rows, lhs_sample(unit_ranges(), 100, 10).rows);
}

TEST(Lhs, OnePointPerStratum) {
    const auto ranges = ranges_around(reference_params());
    const std::size_t n = 1000;
    const auto s = lhs_sample(ranges, n, 3);
    for (Param p : kParams) {
        const auto& iv = bound_of(ranges, p);
        std::vector<int> count(n, 0);
        for (double v : s.column(p)) {
            const auto k = std::min<std::size_t>(std::size_t((v - iv.lo) / (iv.hi - iv.lo) * n), n - 1);
            ++count[k];
        }
        EXPECT_TRUE(std::all_of(count.begin(), count.end(), [](int c) { return c == 1; })) << param_name(p);
    }
}

TEST(Lhs, MarginalsAreUniform) {
    const std::size_t n = 1000;
    const auto ranges = unit_ranges();
    const auto s = lhs_sample(ranges, n, 17);
    for (Param p : kParams) {
        const auto& iv = bound_of(ranges, p);
        auto c = s.column(p);
        for (auto& v : c) v = (v - iv.lo) / (iv.hi - iv.lo);
        std::sort(c.begin(), c.end());
        double ks = 0;
        for (std::size_t k = 0; k < n; ++k)
            ks = std::max({ks, std::abs(c[k] - double(k) / n), std::abs(c[k] - double(k + 1) / n)});
        EXPECT_LT(ks, 0.05) << param_name(p);
    }
}

TEST(Lhs, InfeasibleDrawsAreProjected) {
    ParameterRanges r = unit_ranges();
    bound_of(r, Param::PPlus) = {0.5, 1.0};
    bound_of(r, Param::PZero) = {0.2, 0.5};
    const auto s = lhs_sample(r, 200, 1);
    for (std::size_t k = 0; k < s.size(); ++k) EXPECT_TRUE(validate_params(s.params(k)).ok());
}

TEST(Lhs, InvalidRangesThrow) {
    auto r = unit_ranges();
    bound_of(r, Param::Beta) = {2.0, 1.0};
    EXPECT_THROW(lhs_sample(r, 10, 1), DomainError);
    r = unit_ranges();
    bound_of(r, Param::PZero) = {0.0, 1.5};
    EXPECT_THROW(lhs_sample(r, 10, 1), DomainError);
    EXPECT_THROW(lhs_sample(unit_ranges(), 1, 1), DomainError);
}

TEST(Prcc, CopyOfTargetIsNearOne) {
    const auto s = lhs_sample(unit_ranges(), 1000, 4);
    const auto y = s.column(Param::AlphaNeu);
    EXPECT_GE(prcc(s, y, Param::AlphaNeu), 0.99);
    auto neg = y;
    for (auto& v : neg) v = -v;
    EXPECT_LE(prcc(s, neg, Param::AlphaNeu), -0.99);
}

TEST(Prcc, IndependentNoiseIsNearZero) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto s = lhs_sample(unit_ranges(), 1000, 100 + seed);
        const auto y = noise(1000, 200 + seed);
        for (Param p : kParams) EXPECT_LT(std::abs(prcc(s, y, p)), 0.1) << param_name(p);
    }
}

TEST(Prcc, InvariantUnderMonotoneTransform) {
    auto s = lhs_sample(unit_ranges(), 400, 5);
    const auto eps = noise(400, 6);
    std::vector<double> y;
    for (std::size_t k = 0; k < s.size(); ++k) y.push_back(std::exp(s.rows[k][0]) - s.rows[k][5] + 0.3 * eps[k]);
    std::array<double, kParamCount> before{};
    for (Param p : kParams) before[std::size_t(p)] = prcc(s, y, p);
    for (auto& row : s.rows) row[0] = row[0] * row[0] * row[0];
    for (Param p : kParams) EXPECT_NEAR(prcc(s, y, p), before[std::size_t(p)], 1e-12) << param_name(p);
}

TEST(Prcc, NegatedOutputNegatesExactly) {
    const auto s = lhs_sample(unit_ranges(), 300, 8);
    const auto eps = noise(300, 9);
    std::vector<double> y, neg;
    for (std::size_t k = 0; k < s.size(); ++k) {
        y.push_back(s.rows[k][1] + s.rows[k][7] * eps[k]);
        neg.push_back(-y.back());
    }
    for (Param p : kParams) EXPECT_EQ(prcc(s, neg, p), -prcc(s, y, p)) << param_name(p);
}

TEST(Prcc, ConstantColumnOrOutputIsUndefined) {
    auto r = unit_ranges();
    bound_of(r, Param::SZero) = {5.0, 5.0};
    const auto s = lhs_sample(r, 50, 1);
    const auto y = noise(50, 2);
    EXPECT_THROW(prcc(s, y, Param::SZero), UndefinedCorrelation);
    EXPECT_THROW(prcc(s, std::vector<double>(50, 1.0), Param::Beta), UndefinedCorrelation);
    EXPECT_THROW(prcc(lhs_sample(unit_ranges(), 10, 1), noise(10, 1), Param::Beta), DomainError);
}

TEST(Classify, Thresholds) {
    EXPECT_EQ(classify_correlation(0.45), Strength::Strong);
    EXPECT_EQ(classify_correlation(-0.3), Strength::Median);
    EXPECT_EQ(classify_correlation(0.0), Strength::Weak);
    EXPECT_EQ(classify_correlation(0.4), Strength::Strong);
    EXPECT_EQ(classify_correlation(-0.2), Strength::Median);
    EXPECT_EQ(classify_correlation(0.1999), Strength::Weak);
    EXPECT_THROW(classify_correlation(1.01), DomainError);
    EXPECT_THROW(classify_correlation(NAN), DomainError);
}

TEST(Indices, PureDecay) {
    ModelParams p;
    p.alpha_neg = 0.5;
    PopulationState init;
    init.f_neg = 50;
    init.c_neg = 50;
    const auto ind = compute_indices(p, init, TimeGrid::uniform(0, 60, 0.1));
    EXPECT_EQ(ind[IndexId::FNegMax], 50.0);
    EXPECT_EQ(ind[IndexId::CNegStable], 50.0);
    EXPECT_TRUE(ind.stable);
}

TEST(Indices, NoInitialForwarders) {
    const auto p = reference_params();
    const auto init = make_initial_state(p, 0, 0, 0);
    const auto ind = compute_indices(p, init, TimeGrid::uniform(0, 10, 1));
    for (double v : ind.values) EXPECT_EQ(v, 0.0);
}

TEST(Indices, NegativeDominatesAtReference) {
    const auto p = reference_params();
    const auto ind = compute_indices(p, make_initial_state(p, 68, 40, 265), TimeGrid::uniform(0, 60, 0.1));
    EXPECT_GT(ind[IndexId::CNegStable], ind[IndexId::CPosStable]);
    EXPECT_GT(ind[IndexId::CNegStable], ind[IndexId::CNeuStable]);
    EXPECT_GT(ind[IndexId::FNegMax], ind[IndexId::FPosMax]);
}

TEST(Indices, ShortHorizonIsExtended) {
    const auto p = reference_params();
    const auto ind = compute_indices(p, make_initial_state(p, 68, 40, 265), TimeGrid::uniform(0, 15, 0.5));
    EXPECT_TRUE(ind.stable);
    EXPECT_GT(ind.t_end, 15.0);
}

TEST(Indices, SlowDecayNeverSettles) {
    auto p = reference_params();
    p.alpha_pos = p.alpha_neu = p.alpha_neg = 1e-4;
    const auto ind = compute_indices(p, make_initial_state(p, 68, 40, 265), TimeGrid::uniform(0, 10, 1));
    EXPECT_FALSE(ind.stable);
    EXPECT_EQ(ind.t_end, 80.0);
}

TEST(SensitivityRun, DegenerateRangesLeaveOnlyBetaDefined) {
    const auto base = reference_params();
    ParameterRanges r{};
    for (Param p : kParams) bound_of(r, p) = {base.get(p), base.get(p)};
    bound_of(r, Param::Beta) = {0.5 * base.beta, 1.5 * base.beta};
    const auto rep = sensitivity_run(base, r, 50, 1);
    for (Param p : kParams)
        for (IndexId id : kIndices) EXPECT_EQ(rep.at(p, id).value.has_value(), p == Param::Beta);
    EXPECT_GT(*rep.at(Param::Beta, IndexId::CNegStable).value, 0.9);
}

TEST(SensitivityRun, SignsAroundReferenceAndDeterminism) {
    const auto base = reference_params();
    SensitivityOptions opt;
    opt.workers = 3;
    const auto a = sensitivity_run(base, ranges_around(base), 300, 42, opt);
    EXPECT_GT(*a.at(Param::Beta, IndexId::CNegStable).value, 0.0);
    EXPECT_LT(*a.at(Param::AlphaNeg, IndexId::CNegStable).value, 0.0);
    opt.workers = 1;
    const auto b = sensitivity_run(base, ranges_around(base), 300, 42, opt);
    EXPECT_EQ(prcc_report_json(a).dump(), prcc_report_json(b).dump());
    EXPECT_EQ(a.failed_samples, 0u);
}

TEST(SensitivityRun, TooManyFailuresAbort) {
    auto base = reference_params();
    base.alpha_pos = base.alpha_neu = base.alpha_neg = 1e-4;
    SensitivityOptions opt;
    opt.horizon = TimeGrid::uniform(0, 5, 1);
    EXPECT_THROW(sensitivity_run(base, ranges_around(base, 0.1), 20, 1, opt), AnalysisError);
}

TEST(Sweep, SinglePointMatchesIndices) {
    const auto base = reference_params();
    const auto res = sweep_grid(base, {Param::PPlus}, {{base.p_plus}}, IndexId::CNegStable);
    const auto ind = compute_indices(base, make_initial_state(base, 68, 40, 265), SensitivityOptions{}.horizon);
    ASSERT_EQ(res.values.size(), 1u);
    EXPECT_EQ(*res.values[0], ind[IndexId::CNegStable]);
}

TEST(Sweep, IncreasingProbabilitiesRaiseCumulatives) {
    const auto base = reference_params();
    auto grid = [&](Param p) {
        std::vector<double> g;
        for (int k = 0; k < 10; ++k) g.push_back(base.get(p) * (0.5 + k / 9.0));
        return g;
    };
    auto strictly_up = [](const SweepResult& r) {
        for (std::size_t k = 1; k < r.values.size(); ++k)
            if (!r.values[k] || !r.values[k - 1] || !(*r.values[k] > *r.values[k - 1])) return false;
        return true;
    };
    EXPECT_TRUE(strictly_up(sweep_grid(base, {Param::PPlus}, {grid(Param::PPlus)}, IndexId::CNegStable)));
    EXPECT_TRUE(strictly_up(sweep_grid(base, {Param::PMinus}, {grid(Param::PMinus)}, IndexId::CPosStable)));
    EXPECT_TRUE(strictly_up(sweep_grid(base, {Param::PZero}, {grid(Param::PZero)}, IndexId::CNeuStable)));
}

TEST(Sweep, InfeasiblePointsAreMissing) {
    const auto base = reference_params();
    const auto res = sweep_grid(base, {Param::PPlus, Param::PZero}, {{0.5, 0.9}, {0.01, 0.3}}, IndexId::CNegStable);
    ASSERT_EQ(res.values.size(), 4u);
    // p_plus + 2 p_zero > 1 whenever p_zero = 0.3
    EXPECT_TRUE(res.values[0].has_value());
    EXPECT_FALSE(res.values[1].has_value());
    EXPECT_TRUE(res.values[2].has_value());
    EXPECT_FALSE(res.values[3].has_value());
    EXPECT_THROW(sweep_grid(base, {}, {}, IndexId::CNegStable), DomainError);
}
