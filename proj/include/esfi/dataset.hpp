#pragma once

// Observed cumulative forwarding series: CSV loading, validation, the built-in
// negative-event corpus, and trajectory export.

#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "esfi/csv.hpp"
#include "esfi/errors.hpp"
#include "esfi/integrator.hpp"
#include "esfi/model.hpp"

namespace esfi {

/// Cumulative forwarding counts per emotion, sampled at integer indices
/// (one index = one sampling period of `sample_interval` model time units).
/// Indices are strictly increasing from 0 but may skip values when the source
/// elides samples.
struct ObservedDataset {
    double sample_interval = 1.0;
    std::vector<int> sample_index;
    std::vector<double> c_pos;
    std::vector<double> c_neu;
    std::vector<double> c_neg;
    std::string provenance;

    std::size_t size() const { return sample_index.size(); }

    const std::vector<double>& series(Emotion e) const {
        switch (e) {
        case Emotion::Positive: return c_pos;
        case Emotion::Neutral: return c_neu;
        case Emotion::Negative: return c_neg;
        }
        throw DomainError("unknown emotion");
    }

    std::vector<double> times() const {
        std::vector<double> t;
        t.reserve(size());
        for (int k : sample_index) t.push_back(double(k) * sample_interval);
        return t;
    }

    bool has_gaps() const {
        for (std::size_t k = 0; k < sample_index.size(); ++k)
            if (sample_index[k] != int(k)) return true;
        return false;
    }

    double final_total() const { return c_pos.back() + c_neu.back() + c_neg.back(); }

    void validate() const {
        if (!(sample_interval > 0.0) || !std::isfinite(sample_interval))
            throw DomainError("sample interval must be positive");
        const std::size_t n = sample_index.size();
        if (n < 3) throw DomainError("dataset needs at least 3 samples");
        if (c_pos.size() != n || c_neu.size() != n || c_neg.size() != n)
            throw DomainError("dataset series lengths differ");
        if (sample_index.front() != 0) throw DomainError("first sample index must be 0");
        for (std::size_t k = 1; k < n; ++k)
            if (sample_index[k] <= sample_index[k - 1])
                throw DomainError("sample indices must be strictly increasing");
        for (Emotion e : kEmotions) {
            const auto& s = series(e);
            for (std::size_t k = 0; k < n; ++k) {
                if (!std::isfinite(s[k]) || s[k] < 0.0)
                    throw DomainError("c_" + std::string(emotion_name(e)) + " value at sample " +
                                      std::to_string(sample_index[k]) + " must be finite and >= 0");
                if (k > 0 && s[k] < s[k - 1])
                    throw DomainError("c_" + std::string(emotion_name(e)) + " decreases at sample " +
                                      std::to_string(sample_index[k]));
            }
        }
    }
};

/// Parses a `t,c_pos,c_neu,c_neg` CSV (columns in any order, extra columns
/// ignored). t must run 0,1,2,... without gaps. Errors name the line and column.
inline ObservedDataset load_csv(std::istream& in) {
    static constexpr std::array<const char*, 4> kRequired{"t", "c_pos", "c_neu", "c_neg"};
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
            if (!csv::trim(line).empty()) return true;
        }
        return false;
    };

    if (!next_line()) throw ParseError("empty dataset: missing header", 0, "");
    std::map<std::string, std::size_t, std::less<>> col;
    {
        const auto cells = csv::split(line);
        for (std::size_t c = 0; c < cells.size(); ++c) col.emplace(std::string(csv::trim(cells[c])), c);
    }
    std::array<std::size_t, 4> idx{};
    for (std::size_t r = 0; r < kRequired.size(); ++r) {
        const auto it = col.find(kRequired[r]);
        if (it == col.end())
            throw ParseError("line " + std::to_string(line_no) + ": missing column '" +
                                 kRequired[r] + "'",
                             line_no, kRequired[r]);
        idx[r] = it->second;
    }

    ObservedDataset ds;
    ds.provenance = "csv";
    while (next_line()) {
        const auto cells = csv::split(line);
        std::array<double, 4> v{};
        for (std::size_t r = 0; r < kRequired.size(); ++r) {
            if (idx[r] >= cells.size())
                throw ParseError("line " + std::to_string(line_no) + ": missing cell for column '" +
                                     kRequired[r] + "'",
                                 line_no, kRequired[r]);
            const auto num = csv::parse_number(cells[idx[r]]);
            if (!num || !std::isfinite(*num))
                throw ParseError("line " + std::to_string(line_no) + ", column '" + kRequired[r] +
                                     "': not a number: '" + std::string(csv::trim(cells[idx[r]])) +
                                     "'",
                                 line_no, kRequired[r]);
            v[r] = *num;
        }
        const int expected = int(ds.sample_index.size());
        if (v[0] != double(expected))
            throw ParseError("line " + std::to_string(line_no) + ", column 't': expected " +
                                 std::to_string(expected) + " (consecutive sample indices from 0)",
                             line_no, "t");
        for (std::size_t r = 1; r < 4; ++r) {
            if (v[r] < 0.0)
                throw ParseError("line " + std::to_string(line_no) + ", column '" + kRequired[r] +
                                     "': negative count",
                                 line_no, kRequired[r]);
            const auto& prev = r == 1 ? ds.c_pos : r == 2 ? ds.c_neu : ds.c_neg;
            if (!prev.empty() && v[r] < prev.back())
                throw ParseError("line " + std::to_string(line_no) + ", column '" + kRequired[r] +
                                     "': cumulative count decreases",
                                 line_no, kRequired[r]);
        }
        ds.sample_index.push_back(expected);
        ds.c_pos.push_back(v[1]);
        ds.c_neu.push_back(v[2]);
        ds.c_neg.push_back(v[3]);
    }
    if (ds.size() < 3) throw ParseError("dataset needs at least 3 rows", line_no, "");
    ds.validate();
    return ds;
}

/// Writes a dataset in the loader's format. Datasets with gaps cannot be
/// represented and are rejected.
inline void write_dataset_csv(const ObservedDataset& ds, std::ostream& out) {
    if (ds.has_gaps()) throw DomainError("dataset with elided samples cannot be written as CSV");
    out << "t,c_pos,c_neu,c_neg\n";
    for (std::size_t k = 0; k < ds.size(); ++k)
        out << ds.sample_index[k] << ',' << csv::format_number(ds.c_pos[k]) << ','
            << csv::format_number(ds.c_neu[k]) << ',' << csv::format_number(ds.c_neg[k]) << '\n';
    if (!out) throw IoError("failed writing dataset");
}

/// Cumulative forwards by emotion for the negative-tone event
/// "An Australian Chinese woman who returns to Beijing refusing to quarantine
/// goes out running" (Sina microblog, 30-minute samples). Samples 28..59 are
/// not published; only the printed indices 0..27 and 60 are included.
inline ObservedDataset builtin_negative_event() {
    ObservedDataset ds;
    ds.sample_interval = 1.0;
    for (int k = 0; k <= 27; ++k) ds.sample_index.push_back(k);
    ds.sample_index.push_back(60);
    ds.c_pos = {68,   165,  262,  355,  454,  545,  634,  757,  866,  963,
                1035, 1080, 1095, 1106, 1112, 1116, 1121, 1126, 1130, 1132,
                1132, 1134, 1135, 1136, 1136, 1137, 1137, 1138, 1163};
    ds.c_neu = {40,  111, 181, 251, 305, 351, 403, 469, 529, 576, 613, 627, 631, 634, 635,
                638, 644, 646, 650, 654, 658, 658, 658, 658, 658, 658, 658, 658, 668};
    ds.c_neg = {265,  639,  950,  1204, 1470, 1711, 2015, 2337, 2629, 2921,
                3147, 3270, 3323, 3350, 3374, 3393, 3421, 3437, 3461, 3472,
                3481, 3484, 3489, 3491, 3491, 3493, 3493, 3496, 3573};
    ds.provenance = "builtin:negative-event (samples 28-59 elided in source)";
    return ds;
}

/// Writes `t,s,f_pos,f_neu,f_neg,i,c_pos,c_neu,c_neg` with round-trip decimals.
inline void export_trajectory(const Trajectory& traj, std::ostream& out) {
    out << "t";
    for (auto name : kStateFieldNames) out << ',' << name;
    out << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << csv::format_number(traj.time(k));
        for (double v : traj.states[k].to_array()) out << ',' << csv::format_number(v);
        out << '\n';
    }
    out.flush();
    if (!out) throw IoError("failed writing trajectory");
}

} // namespace esfi
