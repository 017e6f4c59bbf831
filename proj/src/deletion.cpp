#include "lobgen/deletion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace lobgen {

DeletionStats DeletionStats::fit(const std::vector<PlacementRecord>& placements) {
    if (placements.empty()) throw std::invalid_argument("DeletionStats::fit: empty input");
    DeletionStats stats;
    std::map<int, std::int64_t> deleted_count;
    std::map<int, double> lifetime_sum;
    double global_lifetime_sum = 0.0;
    for (const PlacementRecord& rec : placements) {
        if (rec.depth < 0) throw std::invalid_argument("DeletionStats::fit: negative depth");
        stats.placed_by_depth_[rec.depth] += 1;
        stats.total_placed_ += 1;
        if (rec.was_deleted) {
            stats.deleted_by_depth_[rec.depth] += 1;
            stats.total_deleted_ += 1;
            const double life = std::max<double>(1.0, static_cast<double>(rec.lifetime_events));
            deleted_count[rec.depth] += 1;
            lifetime_sum[rec.depth] += life;
            global_lifetime_sum += life;
        }
    }
    if (stats.total_deleted_ == 0)
        throw std::runtime_error("DeletionStats::fit: no deletions observed, stats degenerate");
    for (const auto& [depth, sum] : lifetime_sum)
        stats.mean_duration_by_depth_[depth] =
            std::max(1.0, sum / static_cast<double>(deleted_count[depth]));
    stats.global_mean_duration_ =
        std::max(1.0, global_lifetime_sum / static_cast<double>(stats.total_deleted_));
    return stats;
}

DepthProbability DeletionStats::prob_deleted_given_depth(int depth) const {
    DepthProbability result;
    const auto placed_it = placed_by_depth_.find(depth);
    if (placed_it == placed_by_depth_.end() || placed_it->second == 0) {
        result.value = overall_deletion_rate();
        result.fallback = true;
        return result;
    }
    const double n_t = static_cast<double>(total_placed_);
    const double p_depth_given_deleted = prob_depth_given_deleted(depth);
    const double p_deleted = static_cast<double>(total_deleted_) / n_t;
    const double p_depth = static_cast<double>(placed_it->second) / n_t;
    double p = p_depth_given_deleted * p_deleted / p_depth;
    if (p > 1.0) {
        p = 1.0;
        result.clamped = true;
    }
    result.value = std::max(0.0, p);
    return result;
}

double DeletionStats::prob_depth_given_deleted(int depth) const {
    const auto it = deleted_by_depth_.find(depth);
    if (it == deleted_by_depth_.end()) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(total_deleted_);
}

double DeletionStats::estimated_duration(int insertion_depth) const {
    const auto it = mean_duration_by_depth_.find(insertion_depth);
    return it != mean_duration_by_depth_.end() ? it->second : global_mean_duration_;
}

std::int64_t DeletionStats::deleted_at(int depth) const {
    const auto it = deleted_by_depth_.find(depth);
    return it != deleted_by_depth_.end() ? it->second : 0;
}

std::int64_t DeletionStats::placed_at(int depth) const {
    const auto it = placed_by_depth_.find(depth);
    return it != placed_by_depth_.end() ? it->second : 0;
}

namespace {

template <typename V>
nlohmann::json depth_map_to_json(const std::map<int, V>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [depth, value] : m) j[std::to_string(depth)] = value;
    return j;
}

template <typename V>
std::map<int, V> depth_map_from_json(const nlohmann::json& j) {
    std::map<int, V> m;
    for (const auto& [key, value] : j.items()) m[std::stoi(key)] = value.template get<V>();
    return m;
}

}  // namespace

std::string DeletionStats::to_json() const {
    nlohmann::json j;
    j["deleted_by_depth"] = depth_map_to_json(deleted_by_depth_);
    j["placed_by_depth"] = depth_map_to_json(placed_by_depth_);
    j["mean_duration_by_depth"] = depth_map_to_json(mean_duration_by_depth_);
    j["total_deleted"] = total_deleted_;
    j["total_placed"] = total_placed_;
    j["global_mean_duration"] = global_mean_duration_;
    j["scale"] = scale_;
    return j.dump(2);
}

DeletionStats DeletionStats::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    DeletionStats stats;
    stats.deleted_by_depth_ = depth_map_from_json<std::int64_t>(j.at("deleted_by_depth"));
    stats.placed_by_depth_ = depth_map_from_json<std::int64_t>(j.at("placed_by_depth"));
    stats.mean_duration_by_depth_ = depth_map_from_json<double>(j.at("mean_duration_by_depth"));
    stats.total_deleted_ = j.at("total_deleted").get<std::int64_t>();
    stats.total_placed_ = j.at("total_placed").get<std::int64_t>();
    stats.global_mean_duration_ = j.at("global_mean_duration").get<double>();
    stats.scale_ = j.at("scale").get<double>();
    return stats;
}

double per_event_probability(double p_del, double remaining_events) {
    if (p_del <= 0.0) return 0.0;
    if (p_del >= 1.0) return 1.0;
    if (remaining_events <= 1.0) return p_del;
    return 1.0 - std::pow(1.0 - p_del, 1.0 / remaining_events);
}

void track_order(DeletionStates& states, const Order& order, const DeletionStats& stats) {
    OrderDeletionState state;
    state.order_id = order.id;
    state.insertion_depth = order.insertion_depth;
    state.current_depth = order.insertion_depth;
    state.age_events = 0;
    state.estimated_total_duration = stats.estimated_duration(order.insertion_depth);
    states[order.id] = state;
}

std::vector<std::int64_t> deletion_step(OrderBook& book, const DeletionStats& stats,
                                        DeletionStates& states, std::mt19937_64& rng) {
    // Depths are resolved against the ladder as it stood when the sweep
    // started; deletions inside the sweep do not shift depths mid-sweep.
    const auto bid_depth = book.depth_index(Side::Bid);
    const auto ask_depth = book.depth_index(Side::Ask);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<std::int64_t> deleted;

    for (const std::int64_t id : book.resting_ids()) {
        const Order* order = book.find(id);
        auto state_it = states.find(id);
        if (state_it == states.end())
            throw std::logic_error("deletion_step: resting order without state entry");
        OrderDeletionState& state = state_it->second;
        state.age_events += 1;
        const auto& index = (order->side == Side::Bid) ? bid_depth : ask_depth;
        const auto depth_it = index.find(order->price);
        state.current_depth = depth_it != index.end() ? depth_it->second : state.current_depth;

        const double p = stats.prob_deleted_given_depth(state.current_depth).value;
        const double remaining =
            state.estimated_total_duration - static_cast<double>(state.age_events);
        const double p_event =
            std::clamp(per_event_probability(p, remaining) * stats.scale(), 0.0, 1.0);
        if (uniform(rng) < p_event) {
            book.cancel(id);
            states.erase(state_it);
            deleted.push_back(id);
        }
    }
    return deleted;
}

std::vector<double> cumulative_deletion_rate(const std::vector<bool>& is_deletion) {
    std::vector<double> rate;
    rate.reserve(is_deletion.size());
    std::int64_t deletions = 0;
    for (std::size_t k = 0; k < is_deletion.size(); ++k) {
        if (is_deletion[k]) ++deletions;
        rate.push_back(static_cast<double>(deletions) / static_cast<double>(k + 1));
    }
    return rate;
}

}  // namespace lobgen
