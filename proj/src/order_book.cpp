#include "lobgen/order_book.hpp"

#include <algorithm>
#include <cmath>

namespace lobgen {

SizeSampler uniform_size_sampler(std::int64_t lo, std::int64_t hi) {
    return [lo, hi](std::mt19937_64& rng) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    };
}

OrderBook::OrderBook(std::int64_t tick_size, int min_depth, int max_depth)
    : tick_size_(tick_size), min_depth_(min_depth), max_depth_(max_depth) {}

std::optional<std::int64_t> OrderBook::best_bid() const {
    if (bids_.empty()) return std::nullopt;
    return bids_.begin()->first;
}

std::optional<std::int64_t> OrderBook::best_ask() const {
    if (asks_.empty()) return std::nullopt;
    return asks_.begin()->first;
}

std::optional<double> OrderBook::mid_price() const {
    auto bb = best_bid(), ba = best_ask();
    if (!bb || !ba) return std::nullopt;
    return (static_cast<double>(*bb) + static_cast<double>(*ba)) / 2.0;
}

std::optional<std::int64_t> OrderBook::spread() const {
    auto bb = best_bid(), ba = best_ask();
    if (!bb || !ba) return std::nullopt;
    return *ba - *bb;
}

void OrderBook::refresh_last_mid() {
    if (auto m = mid_price()) last_mid_ = *m;
}

int OrderBook::depth_at_price(Side side, std::int64_t price) const {
    int depth = 0;
    if (side == Side::Bid) {
        for (const auto& [p, q] : bids_) {
            if (p <= price) break;
            ++depth;
        }
    } else {
        for (const auto& [p, q] : asks_) {
            if (p >= price) break;
            ++depth;
        }
    }
    return depth;
}

std::optional<int> OrderBook::depth_of(std::int64_t order_id) const {
    auto it = locate_.find(order_id);
    if (it == locate_.end()) return std::nullopt;
    return depth_at_price(it->second.first, it->second.second);
}

const Order* OrderBook::find(std::int64_t order_id) const {
    auto it = locate_.find(order_id);
    if (it == locate_.end()) return nullptr;
    auto scan = [&](const auto& ladder) -> const Order* {
        auto lit = ladder.find(it->second.second);
        if (lit == ladder.end()) return nullptr;
        for (const Order& o : lit->second)
            if (o.id == order_id) return &o;
        return nullptr;
    };
    return it->second.first == Side::Bid ? scan(bids_) : scan(asks_);
}

void OrderBook::insert_resting(Order& order) {
    order.insertion_depth = depth_at_price(order.side, order.price);
    if (order.side == Side::Bid)
        bids_[order.price].push_back(order);
    else
        asks_[order.price].push_back(order);
    locate_[order.id] = {order.side, order.price};
}

template <typename Ladder>
std::int64_t OrderBook::match_against(Ladder& ladder, Side taker, std::int64_t size,
                                      std::int64_t limit_price, bool has_limit,
                                      std::vector<Execution>& out) {
    while (size > 0 && !ladder.empty()) {
        auto level = ladder.begin();
        if (has_limit) {
            const bool crosses = (taker == Side::Bid) ? limit_price >= level->first
                                                      : limit_price <= level->first;
            if (!crosses) break;
        }
        auto& queue = level->second;
        Order& maker = queue.front();
        const std::int64_t fill = std::min(size, maker.size);
        out.push_back({taker, maker.id, maker.price, fill, event_clock_});
        size -= fill;
        maker.size -= fill;
        if (maker.size == 0) {
            remove_locate(maker.id);
            queue.pop_front();
            if (queue.empty()) ladder.erase(level);
        }
    }
    return size;
}

SubmitResult OrderBook::submit_limit(Side side, std::int64_t price, std::int64_t size) {
    SubmitResult result;
    if (size <= 0 || !on_grid(price)) {
        result.rejected = true;
        return result;
    }
    ++event_clock_;
    std::int64_t remaining = (side == Side::Bid)
        ? match_against(asks_, Side::Bid, size, price, true, result.executions)
        : match_against(bids_, Side::Ask, size, price, true, result.executions);
    if (remaining > 0) {
        Order order{next_id_++, side, price, remaining, event_clock_, 0};
        insert_resting(order);
        result.resting = order;
    }
    refresh_last_mid();
    return result;
}

MarketResult OrderBook::submit_market(Side side, std::int64_t size) {
    MarketResult result;
    if (size <= 0) {
        result.shortfall = size;
        return result;
    }
    ++event_clock_;
    result.shortfall = (side == Side::Bid)
        ? match_against(asks_, Side::Bid, size, 0, false, result.executions)
        : match_against(bids_, Side::Ask, size, 0, false, result.executions);
    refresh_last_mid();
    return result;
}

std::optional<Order> OrderBook::cancel(std::int64_t order_id) {
    auto it = locate_.find(order_id);
    if (it == locate_.end()) return std::nullopt;
    ++event_clock_;
    const auto [side, price] = it->second;
    auto erase_from = [&](auto& ladder) -> Order {
        auto lit = ladder.find(price);
        auto& queue = lit->second;
        auto qit = std::find_if(queue.begin(), queue.end(),
                                [&](const Order& o) { return o.id == order_id; });
        Order removed = *qit;
        queue.erase(qit);
        if (queue.empty()) ladder.erase(lit);
        return removed;
    };
    Order removed = (side == Side::Bid) ? erase_from(bids_) : erase_from(asks_);
    locate_.erase(it);
    return removed;
}

int OrderBook::level_count(Side side) const {
    return side == Side::Bid ? static_cast<int>(bids_.size()) : static_cast<int>(asks_.size());
}

std::vector<Order> OrderBook::enforce_depth_bounds(std::mt19937_64& rng,
                                                   const SizeSampler& size_sampler) {
    std::vector<Order> injected;
    std::uniform_int_distribution<int> offset_dist(5, 10);

    auto truncate_deep = [&](auto& ladder) {
        while (static_cast<int>(ladder.size()) > max_depth_) {
            auto last = std::prev(ladder.end());
            for (const Order& o : last->second) remove_locate(o.id);
            ladder.erase(last);
        }
    };
    truncate_deep(bids_);
    truncate_deep(asks_);

    auto replenish = [&](Side side) {
        const int levels = level_count(side);
        if (levels >= min_depth_) return;
        std::int64_t furthest;
        if (levels == 0) {
            // Reseed an emptied side relative to the last known mid; the first
            // level must not cross the opposite touch.
            std::int64_t anchor = static_cast<std::int64_t>(std::llround(last_mid_));
            anchor -= anchor % tick_size_;
            if (anchor <= 0) anchor = tick_size_;
            const std::int64_t off = static_cast<std::int64_t>(offset_dist(rng)) * tick_size_;
            std::int64_t price = (side == Side::Bid) ? anchor - off : anchor + off;
            if (side == Side::Bid) {
                if (auto ba = best_ask(); ba && price >= *ba) price = *ba - tick_size_;
            } else {
                if (auto bb = best_bid(); bb && price <= *bb) price = *bb + tick_size_;
            }
            if (price <= 0) return;
            Order order{next_id_++, side, price, size_sampler(rng), ++event_clock_, 0};
            insert_resting(order);
            injected.push_back(order);
            furthest = price;
        } else {
            furthest = (side == Side::Bid) ? std::prev(bids_.end())->first
                                           : std::prev(asks_.end())->first;
        }
        while (level_count(side) < min_depth_) {
            const std::int64_t off = static_cast<std::int64_t>(offset_dist(rng)) * tick_size_;
            const std::int64_t price = (side == Side::Bid) ? furthest - off : furthest + off;
            if (price <= 0) break;  // ladder walked off the grid; give up
            Order order{next_id_++, side, price, size_sampler(rng), ++event_clock_, 0};
            insert_resting(order);
            injected.push_back(order);
            furthest = price;
        }
    };
    replenish(Side::Bid);
    replenish(Side::Ask);
    refresh_last_mid();
    return injected;
}

DepthSnapshot OrderBook::snapshot(int levels) const {
    DepthSnapshot snap;
    snap.ask_price.assign(levels, DepthSnapshot::kMissingAsk);
    snap.ask_size.assign(levels, 0);
    snap.bid_price.assign(levels, DepthSnapshot::kMissingBid);
    snap.bid_size.assign(levels, 0);
    int i = 0;
    for (const auto& [price, queue] : asks_) {
        if (i >= levels) break;
        std::int64_t total = 0;
        for (const Order& o : queue) total += o.size;
        snap.ask_price[i] = price;
        snap.ask_size[i] = total;
        ++i;
    }
    i = 0;
    for (const auto& [price, queue] : bids_) {
        if (i >= levels) break;
        std::int64_t total = 0;
        for (const Order& o : queue) total += o.size;
        snap.bid_price[i] = price;
        snap.bid_size[i] = total;
        ++i;
    }
    return snap;
}

std::vector<std::int64_t> OrderBook::resting_ids() const {
    std::vector<std::int64_t> ids;
    ids.reserve(locate_.size());
    for (const auto& [id, loc] : locate_) ids.push_back(id);
    return ids;
}

std::map<std::int64_t, int> OrderBook::depth_index(Side side) const {
    std::map<std::int64_t, int> index;
    int depth = 0;
    if (side == Side::Bid) {
        for (const auto& [price, q] : bids_) index.emplace(price, depth++);
    } else {
        for (const auto& [price, q] : asks_) index.emplace(price, depth++);
    }
    return index;
}

}  // namespace lobgen
