#include <algorithm>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "esfi/calibration.hpp"
#include "esfi/dataset.hpp"
#include "esfi/random.hpp"

using namespace esfi;

namespace {

ObservedDataset parse(const std::string& text) {
    std::istringstream in(text);
    return load_csv(in);
}

std::string parse_error(const std::string& text, std::size_t* row = nullptr, std::string* col = nullptr) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        if (row) *row = e.row();
        if (col) *col = e.column();
        return e.what();
    }
    return {};
}

const char* kSmall = "t,c_pos,c_neu,c_neg\n0,1,2,3\n1,2,2,5\n2,4,3,9\n";

} // namespace

TEST(Csv, NumberFormattingRoundTrips) {
    Rng rng(1);
    for (int k = 0; k < 10000; ++k) {
        const double v = std::ldexp(rng.uniform(), int(rng.below(80)) - 40);
        EXPECT_EQ(csv::parse_number(csv::format_number(v)), v);
    }
    EXPECT_EQ(csv::format_number(3573), "3573");
    EXPECT_EQ(csv::parse_number(" 1e3 "), 1000.0);
    EXPECT_EQ(csv::parse_number("+2.5"), 2.5);
    EXPECT_FALSE(csv::parse_number("12abc").has_value());
    EXPECT_FALSE(csv::parse_number("").has_value());
}

TEST(LoadCsv, WellFormedSmallFile) {
    const auto ds = parse(kSmall);
    EXPECT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds.c_neg[2], 9.0);
    EXPECT_FALSE(ds.has_gaps());
}

TEST(LoadCsv, ColumnOrderCrlfBomAndExtras) {
    const auto ds = parse("\xEF\xBB\xBF" "c_neg,t,note,c_neu,c_pos\r\n3,0,x,2,1\r\n\r\n5,1,y,2,2\r\n9,2,z,3,4\r\n");
    EXPECT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds.c_pos, (std::vector<double>{1, 2, 4}));
    EXPECT_EQ(ds.c_neg, (std::vector<double>{3, 5, 9}));
}

TEST(LoadCsv, DecreasingSeriesNamesRowAndColumn) {
    std::size_t row = 0;
    std::string col;
    const auto msg = parse_error("t,c_pos,c_neu,c_neg\n0,1,2,3\n1,2,2,5\n2,4,3,4\n", &row, &col);
    EXPECT_EQ(row, 4u);
    EXPECT_EQ(col, "c_neg");
    EXPECT_NE(msg.find("line 4"), std::string::npos);
}

TEST(LoadCsv, OtherErrors) {
    std::string col;
    EXPECT_NE(parse_error("t,c_pos,c_neu\n0,1,2\n1,1,2\n2,1,2\n", nullptr, &col), "");
    EXPECT_EQ(col, "c_neg");
    EXPECT_NE(parse_error("t,c_pos,c_neu,c_neg\n0,1,2,3\n2,2,2,5\n3,4,3,9\n", nullptr, &col), "");
    EXPECT_EQ(col, "t");
    EXPECT_NE(parse_error("t,c_pos,c_neu,c_neg\n0,1,2,3\n1,two,2,5\n2,4,3,9\n", nullptr, &col), "");
    EXPECT_EQ(col, "c_pos");
    EXPECT_NE(parse_error("t,c_pos,c_neu,c_neg\n0,1,-2,3\n1,2,2,5\n2,4,3,9\n", nullptr, &col), "");
    EXPECT_EQ(col, "c_neu");
    EXPECT_NE(parse_error("t,c_pos,c_neu,c_neg\n0,1,2,3\n1,2,2,5\n"), "");
    EXPECT_NE(parse_error(""), "");
    EXPECT_NE(parse_error("t,c_pos,c_neu,c_neg\n0,1,2,3\n1,2,2\n2,4,3,9\n"), "");
}

TEST(LoadCsv, SingleCellCorruptionsAreRejected) {
    const auto base = builtin_negative_event();
    ObservedDataset dense = base;
    dense.sample_index.resize(28);
    dense.c_pos.resize(28);
    dense.c_neu.resize(28);
    dense.c_neg.resize(28);

    Rng rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        auto m = dense;
        const std::size_t row = 1 + rng.below(26);
        const int what = int(rng.below(4));
        if (what == 0) {
            m.sample_index[row] += 1 + int(rng.below(3)); // gap or duplicate order
        } else {
            auto& s = what == 1 ? m.c_pos : what == 2 ? m.c_neu : m.c_neg;
            s[row] = s[row - 1] - 1 - double(rng.below(50)); // break monotonicity
        }
        std::ostringstream out;
        out << "t,c_pos,c_neu,c_neg\n";
        for (std::size_t k = 0; k < m.size(); ++k)
            out << m.sample_index[k] << ',' << m.c_pos[k] << ',' << m.c_neu[k] << ',' << m.c_neg[k] << '\n';
        EXPECT_THROW(parse(out.str()), ParseError) << "trial " << trial;
    }
}

TEST(WriteCsv, RoundTripAndGapRejection) {
    const auto ds = parse(kSmall);
    std::ostringstream out;
    write_dataset_csv(ds, out);
    const auto back = parse(out.str());
    EXPECT_EQ(back.c_pos, ds.c_pos);
    EXPECT_EQ(back.c_neu, ds.c_neu);
    EXPECT_EQ(back.c_neg, ds.c_neg);
    std::ostringstream sink;
    EXPECT_THROW(write_dataset_csv(builtin_negative_event(), sink), DomainError);
}

TEST(Builtin, NegativeEventTable) {
    const auto ds = builtin_negative_event();
    ds.validate();
    EXPECT_EQ(ds.size(), 29u);
    EXPECT_EQ(ds.c_pos[0], 68);
    EXPECT_EQ(ds.c_pos[1], 165);
    EXPECT_EQ(ds.c_pos[2], 262);
    EXPECT_EQ(ds.c_neg[27], 3496);
    for (std::size_t k = 20; k <= 27; ++k) EXPECT_EQ(ds.c_neu[k], 658);
    EXPECT_EQ(ds.sample_index.back(), 60);
    EXPECT_EQ(ds.c_pos.back(), 1163);
    EXPECT_EQ(ds.c_neu.back(), 668);
    EXPECT_EQ(ds.c_neg.back(), 3573);
    EXPECT_TRUE(ds.has_gaps());
    EXPECT_DOUBLE_EQ(ds.final_total(), 1163 + 668 + 3573);
}

TEST(Builtin, FirstBlockAsCsvParses) {
    std::ostringstream out;
    const auto ds = builtin_negative_event();
    out << "t,c_pos,c_neu,c_neg\n";
    for (std::size_t k = 0; k < 28; ++k) out << k << ',' << ds.c_pos[k] << ',' << ds.c_neu[k] << ',' << ds.c_neg[k] << '\n';
    const auto back = parse(out.str());
    EXPECT_EQ(back.c_pos[0], 68);
    EXPECT_EQ(back.c_neg[27], 3496);
}

TEST(ExportTrajectory, SingleStateIsTwoLines) {
    Trajectory traj;
    traj.grid = TimeGrid{0, 1, {0}};
    traj.states.push_back(make_initial_state(reference_params(), 1, 2, 3));
    std::ostringstream out;
    export_trajectory(traj, out);
    const auto text = out.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,s,f_pos,f_neu,f_neg,i,c_pos,c_neu,c_neg");
}

TEST(ExportTrajectory, CumulativeColumnsRoundTripBitForBit) {
    const auto p = reference_params();
    const auto traj = integrate(p, make_initial_state(p, 68, 40, 265), TimeGrid::uniform(0, 60, 0.7));
    std::ostringstream out;
    export_trajectory(traj, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    for (std::size_t k = 0; std::getline(in, line); ++k) {
        const auto cells = csv::split(line);
        ASSERT_EQ(cells.size(), 9u);
        EXPECT_EQ(csv::parse_number(cells[6]), traj.states[k].c_pos);
        EXPECT_EQ(csv::parse_number(cells[7]), traj.states[k].c_neu);
        EXPECT_EQ(csv::parse_number(cells[8]), traj.states[k].c_neg);
    }
    EXPECT_NEAR(traj.states.back().c_neg, 3573, 178.65);
}

TEST(ExportTrajectory, FailingSinkThrows) {
    const auto p = reference_params();
    const auto traj = integrate(p, make_initial_state(p, 68, 40, 265), TimeGrid::uniform(0, 1, 0.5));
    std::ostringstream out;
    out.setstate(std::ios::badbit);
    EXPECT_THROW(export_trajectory(traj, out), IoError);
}
