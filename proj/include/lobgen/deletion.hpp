#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lobgen/order_book.hpp"

namespace lobgen {

/// One observed order life: where it entered the queue, whether it ended by
/// deletion, and how many events it survived.
struct PlacementRecord {
    int depth = 0;
    bool was_deleted = false;
    std::int64_t lifetime_events = 1;
};

struct DepthProbability {
    double value = 0.0;
    bool clamped = false;   // raw Bayes ratio exceeded 1 (sparse counts)
    bool fallback = false;  // depth never observed among placements
};

/// Empirical depth-conditioned deletion statistics.
///
/// Counts deletions and placements per depth and mean lifetimes per insertion
/// depth; immutable after fit() and shareable read-only across parallel
/// simulation paths.
class DeletionStats {
public:
    /// Builds the tables from observed placements. Throws std::invalid_argument
    /// on empty input and std::runtime_error when no record is a deletion
    /// (every probability would be undefined).
    static DeletionStats fit(const std::vector<PlacementRecord>& placements);

    /// P(Deleted | Depth = x) via the Bayes ratio
    /// P(Depth=x | Deleted) * (N_d/N_t) / (N_p^x/N_t), clamped to [0, 1].
    /// A depth with no placements falls back to the overall deletion rate
    /// N_d/N_t, flagged in the result.
    DepthProbability prob_deleted_given_depth(int depth) const;

    /// P(Depth = x | Deleted) = N_d^x / N_d.
    double prob_depth_given_deleted(int depth) const;

    /// Expected total lifetime (events) for an order inserted at this depth:
    /// mean lifetime of deleted orders at that insertion depth, or the global
    /// mean when the depth was never observed. Always >= 1.
    double estimated_duration(int insertion_depth) const;

    double overall_deletion_rate() const {
        return static_cast<double>(total_deleted_) / static_cast<double>(total_placed_);
    }

    std::int64_t total_deleted() const { return total_deleted_; }
    std::int64_t total_placed() const { return total_placed_; }
    std::int64_t deleted_at(int depth) const;
    std::int64_t placed_at(int depth) const;

    double scale() const { return scale_; }
    void set_scale(double s) { scale_ = s; }

    std::string to_json() const;
    static DeletionStats from_json(const std::string& text);

    bool operator==(const DeletionStats&) const = default;

private:
    std::map<int, std::int64_t> deleted_by_depth_;
    std::map<int, std::int64_t> placed_by_depth_;
    std::map<int, double> mean_duration_by_depth_;
    std::int64_t total_deleted_ = 0;
    std::int64_t total_placed_ = 0;
    double global_mean_duration_ = 1.0;
    double scale_ = 1.0;
};

/// Converts a deletion probability over a remaining horizon into the per-event
/// probability P_e = 1 - (1 - p)^(1/remaining). A horizon of T events with this
/// hazard compounds back to p exactly. remaining_events <= 0 (an order that
/// outlived its estimate) is treated as an immediate one-event horizon.
double per_event_probability(double p_del, double remaining_events);

/// Per-order bookkeeping for the deletion sweep.
struct OrderDeletionState {
    std::int64_t order_id = 0;
    int insertion_depth = 0;
    int current_depth = 0;
    std::int64_t age_events = 0;
    double estimated_total_duration = 1.0;  // T_0, from insertion depth
};

using DeletionStates = std::map<std::int64_t, OrderDeletionState>;

/// Registers a freshly rested order with the sweep state table.
void track_order(DeletionStates& states, const Order& order, const DeletionStats& stats);

/// One deletion sweep over every resting order: ages each order, refreshes its
/// depth, recomputes the scaled per-event probability and deletes it when the
/// uniform draw falls below it. Orders are visited in ascending id order so a
/// fixed rng seed replays exactly. Returns the deleted ids.
std::vector<std::int64_t> deletion_step(OrderBook& book, const DeletionStats& stats,
                                        DeletionStates& states, std::mt19937_64& rng);

/// Element k is (deletions among the first k+1 events) / (k+1).
std::vector<double> cumulative_deletion_rate(const std::vector<bool>& is_deletion);

}  // namespace lobgen
