#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "targeval/core.hpp"
#include "targeval/errors.hpp"
#include "targeval/rng.hpp"

namespace targeval {

/// Renders a value with 12 significant digits, the format used by every
/// emitted table.
inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// In-memory image of a population file. Two schemas, told apart by the
/// header row: per-method scores (`unit_id,outcome,score_s,score_t`) or
/// explicit 1-based ranks (`unit_id,outcome,rank_s,rank_t`).
struct PopulationFile {
    bool has_ranks = false;
    std::vector<std::string> unit_ids;
    std::vector<int> outcomes;
    std::vector<double> score_s, score_t;      // when !has_ranks
    std::vector<std::int64_t> rank_s, rank_t;  // when has_ranks

    std::size_t size() const { return unit_ids.size(); }
};

inline constexpr const char* kScoresHeader = "unit_id,outcome,score_s,score_t";
inline constexpr const char* kRanksHeader = "unit_id,outcome,rank_s,rank_t";

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

inline double parse_double_field(const std::string& field, std::size_t line_no,
                                 const char* column) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end != begin + field.size() || field.empty() || !std::isfinite(value)) {
        throw ValidationError("line " + std::to_string(line_no) + ": column " + column +
                              " is not a finite number: '" + field + "'");
    }
    return value;
}

inline std::int64_t parse_rank_field(const std::string& field, std::size_t line_no,
                                     const char* column) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const long long value = std::strtoll(begin, &end, 10);
    if (end != begin + field.size() || field.empty()) {
        throw ValidationError("line " + std::to_string(line_no) + ": column " + column +
                              " is not an integer: '" + field + "'");
    }
    return value;
}

inline void check_rank_permutation(const std::vector<std::int64_t>& ranks,
                                   const std::vector<std::size_t>& line_of_row,
                                   const char* column) {
    const auto n = static_cast<std::int64_t>(ranks.size());
    std::vector<std::size_t> first_row(ranks.size(), 0);
    std::vector<bool> seen(ranks.size(), false);
    for (std::size_t row = 0; row < ranks.size(); ++row) {
        const std::int64_t r = ranks[row];
        if (r < 1 || r > n) {
            throw ValidationError("line " + std::to_string(line_of_row[row]) + ": column " +
                                  column + " has rank " + std::to_string(r) +
                                  " outside 1.." + std::to_string(n));
        }
        const auto slot = static_cast<std::size_t>(r - 1);
        if (seen[slot]) {
            throw ValidationError("line " + std::to_string(line_of_row[row]) + ": column " +
                                  column + " repeats rank " + std::to_string(r) +
                                  " (first used on line " + std::to_string(line_of_row[first_row[slot]]) +
                                  "); ranks must form a permutation of 1.." + std::to_string(n));
        }
        seen[slot] = true;
        first_row[slot] = row;
    }
}

} // namespace detail

/// Parses and validates a population file. Errors carry 1-based line numbers
/// (the header is line 1).
inline PopulationFile read_population_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open population file '" + path + "'");

    PopulationFile file;
    std::string line;
    std::size_t line_no = 0;
    std::unordered_map<std::string, std::size_t> id_lines;
    std::vector<std::size_t> line_of_row;

    if (!std::getline(in, line)) throw ValidationError("'" + path + "' is empty");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == kScoresHeader) {
        file.has_ranks = false;
    } else if (line == kRanksHeader) {
        file.has_ranks = true;
    } else {
        throw ValidationError("line 1: header must be '" + std::string(kScoresHeader) + "' or '" +
                              std::string(kRanksHeader) + "', got '" + line + "'");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.eof()) break;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.size() != 4) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                                  std::to_string(fields.size()));
        }
        const std::string& id = fields[0];
        if (id.empty()) {
            throw ValidationError("line " + std::to_string(line_no) + ": empty unit_id");
        }
        const auto inserted = id_lines.emplace(id, line_no);
        if (!inserted.second) {
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate unit_id '" + id +
                                  "' (first seen on line " + std::to_string(inserted.first->second) +
                                  ")");
        }
        int outcome = 0;
        if (fields[1] == "0") {
            outcome = 0;
        } else if (fields[1] == "1") {
            outcome = 1;
        } else {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": outcome must be 0 or 1, got '" + fields[1] + "'");
        }
        file.unit_ids.push_back(id);
        file.outcomes.push_back(outcome);
        line_of_row.push_back(line_no);
        if (file.has_ranks) {
            file.rank_s.push_back(detail::parse_rank_field(fields[2], line_no, "rank_s"));
            file.rank_t.push_back(detail::parse_rank_field(fields[3], line_no, "rank_t"));
        } else {
            file.score_s.push_back(detail::parse_double_field(fields[2], line_no, "score_s"));
            file.score_t.push_back(detail::parse_double_field(fields[3], line_no, "score_t"));
        }
    }
    if (file.size() < 2) {
        throw ValidationError("'" + path + "' holds " + std::to_string(file.size()) +
                              " units; at least 2 required");
    }
    if (file.has_ranks) {
        detail::check_rank_permutation(file.rank_s, line_of_row, "rank_s");
        detail::check_rank_permutation(file.rank_t, line_of_row, "rank_t");
    }
    return file;
}

/// Writes the canonical byte representation: exact lowercase header, one
/// newline-terminated row per unit, values at 12 significant digits.
inline void write_population_file(const std::string& path, const PopulationFile& file) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write population file '" + path + "'");
    out << (file.has_ranks ? kRanksHeader : kScoresHeader) << '\n';
    for (std::size_t i = 0; i < file.size(); ++i) {
        out << file.unit_ids[i] << ',' << file.outcomes[i] << ',';
        if (file.has_ranks) {
            out << file.rank_s[i] << ',' << file.rank_t[i] << '\n';
        } else {
            out << format_value(file.score_s[i]) << ',' << format_value(file.score_t[i]) << '\n';
        }
    }
    if (!out) throw ValidationError("write failed for '" + path + "'");
}

struct IngestResult {
    Population population;
    TargetingMethod method_s;
    TargetingMethod method_t;
};

/// Builds the population and both targeting methods from a parsed file.
/// Score columns go through rank_from_scores with the given tie policy;
/// rank columns are taken as-is.
inline IngestResult ingest(const PopulationFile& file, const TieBreak& tie_break = TieBreak::by_id()) {
    std::vector<Unit> units;
    units.reserve(file.size());
    for (std::size_t i = 0; i < file.size(); ++i) {
        units.push_back(Unit{file.unit_ids[i], file.outcomes[i]});
    }
    Population population(std::move(units));
    if (file.has_ranks) {
        const auto order_from_ranks = [&](const std::vector<std::int64_t>& ranks) {
            std::vector<std::uint32_t> order(file.size());
            for (std::size_t i = 0; i < file.size(); ++i) {
                order[static_cast<std::size_t>(ranks[i] - 1)] = static_cast<std::uint32_t>(i);
            }
            return order;
        };
        TargetingMethod method_s = TargetingMethod::from_order(population, order_from_ranks(file.rank_s));
        TargetingMethod method_t = TargetingMethod::from_order(population, order_from_ranks(file.rank_t));
        return IngestResult{std::move(population), std::move(method_s), std::move(method_t)};
    }
    std::unordered_map<std::string, double> scores_s, scores_t;
    scores_s.reserve(file.size());
    scores_t.reserve(file.size());
    for (std::size_t i = 0; i < file.size(); ++i) {
        scores_s.emplace(file.unit_ids[i], file.score_s[i]);
        scores_t.emplace(file.unit_ids[i], file.score_t[i]);
    }
    TargetingMethod method_s = rank_from_scores(population, scores_s, tie_break);
    TargetingMethod method_t = rank_from_scores(population, scores_t, tie_break);
    return IngestResult{std::move(population), std::move(method_s), std::move(method_t)};
}

inline IngestResult ingest(const std::string& path, const TieBreak& tie_break = TieBreak::by_id()) {
    return ingest(read_population_file(path), tie_break);
}

/// Generates a synthetic population with two score columns and a tunable
/// association between the S ranking and the outcomes:
///   - association 0: outcomes are assigned uniformly at random, so both
///     precision curves are statistically flat;
///   - association 1: the positives are exactly the top-scored units under
///     S, so its precision curve is monotone non-increasing.
/// Intermediate values pin round(association * positives) of the positives
/// to the top of the S ranking and scatter the rest uniformly. The T score
/// column is an independent uniform ranking. Deterministic per seed.
inline PopulationFile synth(std::int64_t n, double positive_rate, double association,
                            std::uint64_t seed) {
    if (n < 2 || n % 2 != 0) {
        throw ValidationError("synth: population size must be even and >= 2, got " +
                              std::to_string(n));
    }
    if (!(positive_rate >= 0.0 && positive_rate <= 1.0)) {
        throw ValidationError("synth: positive_rate must lie in [0, 1]");
    }
    if (!(association >= 0.0 && association <= 1.0)) {
        throw ValidationError("synth: association must lie in [0, 1]");
    }
    SplitMix64 rng = SplitMix64::stream(seed, 0);
    const auto un = static_cast<std::size_t>(n);

    // s_rank_of[i] / t_rank_of[i]: 1-based rank of unit i under each method.
    std::vector<std::uint32_t> to_unit;
    partial_shuffle(to_unit, un, un, rng);
    std::vector<std::uint32_t> s_rank_of(un);
    for (std::size_t r = 0; r < un; ++r) s_rank_of[to_unit[r]] = static_cast<std::uint32_t>(r + 1);
    partial_shuffle(to_unit, un, un, rng);
    std::vector<std::uint32_t> t_rank_of(un);
    for (std::size_t r = 0; r < un; ++r) t_rank_of[to_unit[r]] = static_cast<std::uint32_t>(r + 1);

    const auto positives = static_cast<std::int64_t>(std::llround(positive_rate * static_cast<double>(n)));
    const auto pinned = static_cast<std::int64_t>(std::llround(association * static_cast<double>(positives)));
    std::vector<int> outcome_of_s_rank(un, 0);
    for (std::int64_t r = 0; r < pinned; ++r) outcome_of_s_rank[static_cast<std::size_t>(r)] = 1;
    const auto free_slots = static_cast<std::size_t>(n - pinned);
    std::vector<std::uint32_t> scatter;
    partial_shuffle(scatter, free_slots, static_cast<std::size_t>(positives - pinned), rng);
    for (std::int64_t i = 0; i < positives - pinned; ++i) {
        outcome_of_s_rank[static_cast<std::size_t>(pinned) + scatter[static_cast<std::size_t>(i)]] = 1;
    }

    int id_width = 1;
    for (std::int64_t v = n; v >= 10; v /= 10) ++id_width;

    PopulationFile file;
    file.has_ranks = false;
    file.unit_ids.reserve(un);
    for (std::size_t i = 0; i < un; ++i) {
        std::ostringstream id;
        id << 'u';
        id.width(id_width);
        id.fill('0');
        id << (i + 1);
        file.unit_ids.push_back(id.str());
        file.outcomes.push_back(outcome_of_s_rank[s_rank_of[i] - 1]);
        file.score_s.push_back(static_cast<double>(n - s_rank_of[i] + 1) / static_cast<double>(n));
        file.score_t.push_back(static_cast<double>(n - t_rank_of[i] + 1) / static_cast<double>(n));
    }
    return file;
}

} // namespace targeval
