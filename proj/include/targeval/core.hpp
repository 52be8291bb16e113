#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "targeval/errors.hpp"
#include "targeval/rng.hpp"

namespace targeval {

/// One unit of the finite population: an opaque identifier plus a binary
/// outcome that is revealed when the unit is observed.
struct Unit {
    std::string id;
    int outcome = 0;
};

/// Finite ordered population of units with binary outcomes.
/// Immutable after construction; all operations on it are pure.
class Population {
public:
    explicit Population(std::vector<Unit> units) : units_(std::move(units)) {
        if (units_.size() < 2) {
            throw ValidationError("population must contain at least 2 units");
        }
        index_.reserve(units_.size());
        for (std::size_t i = 0; i < units_.size(); ++i) {
            const Unit& u = units_[i];
            if (u.outcome != 0 && u.outcome != 1) {
                throw ValidationError("unit '" + u.id + "' has non-binary outcome " +
                                      std::to_string(u.outcome));
            }
            if (!index_.emplace(u.id, i).second) {
                throw ValidationError("duplicate unit id '" + u.id + "'");
            }
        }
    }

    std::size_t size() const { return units_.size(); }
    const Unit& unit(std::size_t index) const { return units_[index]; }
    int outcome(std::size_t index) const { return units_[index].outcome; }

    bool contains(const std::string& id) const { return index_.count(id) != 0; }

    std::size_t index_of(const std::string& id) const {
        const auto it = index_.find(id);
        if (it == index_.end()) throw ValidationError("unknown unit id '" + id + "'");
        return it->second;
    }

    std::int64_t positive_count() const {
        std::int64_t count = 0;
        for (const Unit& u : units_) count += u.outcome;
        return count;
    }

private:
    std::vector<Unit> units_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Policy for resolving equal scores when turning scores into a ranking.
struct TieBreak {
    enum class Kind { ById, Seeded };

    Kind kind = Kind::ById;
    std::uint64_t seed = 0;

    static TieBreak by_id() { return TieBreak{}; }
    static TieBreak seeded(std::uint64_t seed) { return TieBreak{Kind::Seeded, seed}; }
};

/// A targeting method: a total ranking of the population, rank 1 being the
/// highest priority. Selection from any subset is the restriction of this
/// global ranking, so the top-j of a subset is fully determined by it.
class TargetingMethod {
public:
    /// Builds from unit ids listed best-first. Must be a bijection onto the
    /// population's ids.
    static TargetingMethod from_ranking(const Population& population,
                                        const std::vector<std::string>& ids_best_first) {
        if (ids_best_first.size() != population.size()) {
            throw ValidationError("ranking lists " + std::to_string(ids_best_first.size()) +
                                  " ids for a population of " + std::to_string(population.size()));
        }
        std::vector<std::uint32_t> order;
        order.reserve(ids_best_first.size());
        for (const std::string& id : ids_best_first) {
            order.push_back(static_cast<std::uint32_t>(population.index_of(id)));
        }
        return from_order(population, std::move(order));
    }

    /// Builds from unit indices listed best-first (must be a permutation).
    static TargetingMethod from_order(const Population& population,
                                      std::vector<std::uint32_t> order_best_first) {
        const std::size_t n = population.size();
        if (order_best_first.size() != n) {
            throw ValidationError("ranking order size does not match population size");
        }
        std::vector<std::uint32_t> rank_of(n, kNoRank);
        for (std::size_t r = 0; r < n; ++r) {
            const std::uint32_t idx = order_best_first[r];
            if (idx >= n) throw ValidationError("ranking refers to unit index out of range");
            if (rank_of[idx] != kNoRank) {
                throw ValidationError("unit '" + population.unit(idx).id +
                                      "' appears more than once in the ranking");
            }
            rank_of[idx] = static_cast<std::uint32_t>(r);
        }
        return TargetingMethod(std::move(order_best_first), std::move(rank_of));
    }

    std::size_t population_size() const { return order_.size(); }

    /// order()[r] is the population index of the unit at rank r+1.
    const std::vector<std::uint32_t>& order() const { return order_; }

    /// 1-based rank of a unit (1 = highest priority).
    std::uint32_t rank_of(std::size_t unit_index) const { return rank_of_[unit_index] + 1; }

    TargetingMethod reversed() const {
        std::vector<std::uint32_t> rev(order_.rbegin(), order_.rend());
        std::vector<std::uint32_t> rank_of(rev.size());
        for (std::size_t r = 0; r < rev.size(); ++r) rank_of[rev[r]] = static_cast<std::uint32_t>(r);
        return TargetingMethod(std::move(rev), std::move(rank_of));
    }

private:
    static constexpr std::uint32_t kNoRank = 0xFFFFFFFFU;

    TargetingMethod(std::vector<std::uint32_t> order, std::vector<std::uint32_t> rank_of)
        : order_(std::move(order)), rank_of_(std::move(rank_of)) {}

    std::vector<std::uint32_t> order_;
    std::vector<std::uint32_t> rank_of_;
};

/// Precision curve of a method: mean outcome of its global top j for
/// j = 1..N, backed by exact integer prefix counts so any value can be
/// recovered as a ratio of integers.
class PrecisionCurve {
public:
    /// prefix_positives[j] = number of positives among the top j; [0] must be 0.
    explicit PrecisionCurve(std::vector<std::int64_t> prefix_positives)
        : prefix_(std::move(prefix_positives)) {
        if (prefix_.empty() || prefix_[0] != 0) {
            throw ValidationError("prefix counts must start at 0");
        }
    }

    std::size_t size() const { return prefix_.size() - 1; }

    /// mu_j; at(0) is 0 by convention.
    double at(std::size_t j) const {
        return j == 0 ? 0.0 : static_cast<double>(prefix_[j]) / static_cast<double>(j);
    }

    std::int64_t positives_at(std::size_t j) const { return prefix_[j]; }

    /// Outcome of the unit at rank j (1-based).
    int outcome_at_rank(std::size_t j) const {
        return static_cast<int>(prefix_[j] - prefix_[j - 1]);
    }

    std::vector<double> values() const {
        std::vector<double> v(size());
        for (std::size_t j = 1; j <= size(); ++j) v[j - 1] = at(j);
        return v;
    }

private:
    std::vector<std::int64_t> prefix_;
};

namespace detail {

inline void check_k_in_range(std::size_t k, std::size_t n) {
    if (k < 1 || k > n) {
        throw ValidationError("resource level k=" + std::to_string(k) +
                              " out of range [1, " + std::to_string(n) + "]");
    }
}

inline void check_same_population(const TargetingMethod& method, const Population& population,
                                  const char* what) {
    if (method.population_size() != population.size()) {
        throw ValidationError(std::string(what) + ": method was built for a population of " +
                              std::to_string(method.population_size()) + ", got " +
                              std::to_string(population.size()));
    }
}

} // namespace detail

/// Turns per-unit scores into a ranking, highest score first. Equal scores
/// are broken by ascending unit id, or by a seeded shuffle of each tied
/// group when TieBreak::seeded is selected (same seed, same ranking).
inline TargetingMethod rank_from_scores(const Population& population,
                                        const std::unordered_map<std::string, double>& scores,
                                        const TieBreak& tie_break = TieBreak::by_id()) {
    const std::size_t n = population.size();
    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& id = population.unit(i).id;
        if (scores.find(id) == scores.end()) {
            throw ValidationError("missing score for unit '" + id + "'");
        }
        order[i] = static_cast<std::uint32_t>(i);
    }
    const auto score_of = [&](std::uint32_t idx) { return scores.at(population.unit(idx).id); };
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double sa = score_of(a);
        const double sb = score_of(b);
        if (sa != sb) return sa > sb;
        return population.unit(a).id < population.unit(b).id;
    });
    if (tie_break.kind == TieBreak::Kind::Seeded) {
        SplitMix64 rng = SplitMix64::stream(tie_break.seed, 0);
        std::size_t run_begin = 0;
        while (run_begin < n) {
            std::size_t run_end = run_begin + 1;
            while (run_end < n && score_of(order[run_end]) == score_of(order[run_begin])) {
                ++run_end;
            }
            for (std::size_t i = run_begin; i + 1 < run_end; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.below(run_end - i));
                std::swap(order[i], order[j]);
            }
            run_begin = run_end;
        }
    }
    return TargetingMethod::from_order(population, std::move(order));
}

/// The j members of `subset` with the best global ranks, in rank order.
inline std::vector<std::string> select_top(const TargetingMethod& method,
                                           const Population& population,
                                           const std::vector<std::string>& subset,
                                           std::size_t j) {
    detail::check_same_population(method, population, "select_top");
    if (j > subset.size()) {
        throw ValidationError("select_top: j=" + std::to_string(j) + " exceeds subset size " +
                              std::to_string(subset.size()));
    }
    std::vector<std::uint32_t> ranks;
    ranks.reserve(subset.size());
    std::unordered_set<std::uint32_t> seen;
    for (const std::string& id : subset) {
        const auto idx = static_cast<std::uint32_t>(population.index_of(id));
        if (!seen.insert(idx).second) {
            throw ValidationError("select_top: duplicate unit id '" + id + "' in subset");
        }
        ranks.push_back(method.rank_of(idx));
    }
    std::sort(ranks.begin(), ranks.end());
    std::vector<std::string> top;
    top.reserve(j);
    for (std::size_t i = 0; i < j; ++i) {
        top.push_back(population.unit(method.order()[ranks[i] - 1]).id);
    }
    return top;
}

/// Precision curve of the method over the whole population, one prefix pass.
inline PrecisionCurve precision_curve(const TargetingMethod& method,
                                      const Population& population) {
    detail::check_same_population(method, population, "precision_curve");
    std::vector<std::int64_t> prefix(population.size() + 1, 0);
    for (std::size_t r = 0; r < population.size(); ++r) {
        prefix[r + 1] = prefix[r] + population.outcome(method.order()[r]);
    }
    return PrecisionCurve(std::move(prefix));
}

/// True estimand: difference in precision at k between the two methods on
/// the full population.
inline double delta_true(const TargetingMethod& method_s, const TargetingMethod& method_t,
                         const Population& population, std::size_t k) {
    detail::check_k_in_range(k, population.size());
    const PrecisionCurve cs = precision_curve(method_s, population);
    const PrecisionCurve ct = precision_curve(method_t, population);
    return static_cast<double>(cs.positives_at(k) - ct.positives_at(k)) / static_cast<double>(k);
}

} // namespace targeval
