#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

namespace lobgen {

enum class Side : std::uint8_t { Bid, Ask };

constexpr Side opposite(Side s) noexcept { return s == Side::Bid ? Side::Ask : Side::Bid; }

/// A resting limit order. Prices are integer ticks; sizes are shares.
struct Order {
    std::int64_t id = 0;
    Side side = Side::Bid;
    std::int64_t price = 0;
    std::int64_t size = 0;
    std::uint64_t seq = 0;             // event counter at insertion, strictly increasing
    int insertion_depth = 0;           // occupied better-priced levels at insertion time
};

/// One fill against a resting order.
struct Execution {
    Side taker_side = Side::Bid;
    std::int64_t maker_order_id = 0;
    std::int64_t price = 0;
    std::int64_t size = 0;
    std::uint64_t event_clock = 0;
};

struct SubmitResult {
    std::vector<Execution> executions;
    std::optional<Order> resting;      // remainder, if any
    bool rejected = false;             // bad size or off-grid price; book unchanged
};

struct MarketResult {
    std::vector<Execution> executions;
    std::int64_t shortfall = 0;        // unfilled size when liquidity ran out
};

/// Aggregated top-of-book view. Missing levels carry the sentinel
/// prices below (LOBSTER convention) and size 0.
struct DepthSnapshot {
    static constexpr std::int64_t kMissingAsk = 9999999999LL;
    static constexpr std::int64_t kMissingBid = -9999999999LL;
    std::vector<std::int64_t> ask_price, ask_size;
    std::vector<std::int64_t> bid_price, bid_size;
};

/// Samples a size for injected noise orders.
using SizeSampler = std::function<std::int64_t(std::mt19937_64&)>;

/// Uniform sizes on [1, 100]; used when no empirical size distribution is at hand.
SizeSampler uniform_size_sampler(std::int64_t lo = 1, std::int64_t hi = 100);

/// Price-time-priority limit order book.
///
/// Single-writer: all mutating calls on one instance must be serialized.
/// Independent books (one per simulation path) may run in parallel.
class OrderBook {
public:
    explicit OrderBook(std::int64_t tick_size = 1, int min_depth = 10, int max_depth = 25);

    /// Submits a limit order. Crossing volume executes against the opposite
    /// side in price-time priority; any remainder rests. Rejected (book
    /// untouched) on non-positive size or a price off the tick grid.
    SubmitResult submit_limit(Side side, std::int64_t price, std::int64_t size);

    /// Submits a market order: walks the opposite ladder until filled or the
    /// side is exhausted; the unfilled remainder is reported as shortfall.
    MarketResult submit_market(Side side, std::int64_t size);

    /// Removes a resting order; queue order of the others is preserved.
    /// Returns the removed order, or nullopt for an unknown id.
    std::optional<Order> cancel(std::int64_t order_id);

    /// Restores the depth bounds: sides with more than max_depth occupied
    /// levels are truncated at the deep end; sides with fewer than min_depth
    /// gain noise limit orders at 5-10 tick offsets beyond the furthest
    /// level until the minimum is met. A fully empty side is reseeded
    /// relative to the last known mid. Returns the injected orders.
    std::vector<Order> enforce_depth_bounds(std::mt19937_64& rng, const SizeSampler& size_sampler);

    /// Top `levels` per side with per-price aggregated sizes.
    DepthSnapshot snapshot(int levels) const;

    std::optional<std::int64_t> best_bid() const;
    std::optional<std::int64_t> best_ask() const;
    std::optional<double> mid_price() const;
    std::optional<std::int64_t> spread() const;

    /// Occupied strictly-better-priced levels on the order's side.
    std::optional<int> depth_of(std::int64_t order_id) const;

    int level_count(Side side) const;
    std::size_t order_count() const { return locate_.size(); }
    bool contains(std::int64_t order_id) const { return locate_.count(order_id) != 0; }
    const Order* find(std::int64_t order_id) const;

    /// Resting ids in ascending order; deterministic iteration base for the
    /// deletion sweep.
    std::vector<std::int64_t> resting_ids() const;

    /// Price -> depth index per side, recomputed on demand. One ladder walk
    /// instead of a walk per depth_of query.
    std::map<std::int64_t, int> depth_index(Side side) const;

    std::int64_t tick_size() const { return tick_size_; }
    std::uint64_t event_clock() const { return event_clock_; }
    int min_depth() const { return min_depth_; }
    int max_depth() const { return max_depth_; }
    double last_mid() const { return last_mid_; }
    void set_last_mid(double mid) { last_mid_ = mid; }

private:
    using BidLadder = std::map<std::int64_t, std::deque<Order>, std::greater<>>;
    using AskLadder = std::map<std::int64_t, std::deque<Order>>;

    bool on_grid(std::int64_t price) const { return price > 0 && price % tick_size_ == 0; }
    int depth_at_price(Side side, std::int64_t price) const;
    void insert_resting(Order& order);
    void remove_locate(std::int64_t id) { locate_.erase(id); }
    void refresh_last_mid();

    template <typename Ladder>
    std::int64_t match_against(Ladder& ladder, Side taker, std::int64_t size,
                               std::int64_t limit_price, bool has_limit,
                               std::vector<Execution>& out);

    BidLadder bids_;
    AskLadder asks_;
    std::map<std::int64_t, std::pair<Side, std::int64_t>> locate_;  // id -> (side, price)
    std::int64_t tick_size_;
    int min_depth_;
    int max_depth_;
    std::uint64_t event_clock_ = 0;
    std::int64_t next_id_ = 1;
    double last_mid_ = 0.0;
};

}  // namespace lobgen
