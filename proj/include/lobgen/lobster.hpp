#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace lobgen {

// LOBSTER message event type codes, plus the synthetic market-order code 6
// produced by infer_market_orders (6 is unused by the upstream format).
constexpr int kEventSubmit = 1;
constexpr int kEventPartialCancel = 2;
constexpr int kEventDelete = 3;
constexpr int kEventExecuteVisible = 4;
constexpr int kEventExecuteHidden = 5;
constexpr int kEventMarketOrder = 6;
constexpr int kEventHalt = 7;

/// One row of a LOBSTER message file. Prices keep the 1e-4 dollar integer
/// convention end to end.
struct MessageRecord {
    double time = 0.0;  // seconds after midnight
    int event_type = kEventSubmit;
    std::int64_t order_id = 0;
    std::int64_t size = 0;
    std::int64_t price = 0;
    int direction = 1;  // +1 buy, -1 sell

    bool operator==(const MessageRecord&) const = default;
};

/// One row of a LOBSTER level-10 order book file: the book state after the
/// aligned message. Missing levels carry the usual sentinels.
struct BookRecord {
    static constexpr int kLevels = 10;
    static constexpr std::int64_t kMissingAsk = 9999999999LL;
    static constexpr std::int64_t kMissingBid = -9999999999LL;
    std::array<std::int64_t, kLevels> ask_price{}, ask_size{}, bid_price{}, bid_size{};

    bool operator==(const BookRecord&) const = default;
};

/// Parses a headerless 6-column message CSV. Throws std::runtime_error naming
/// the offending line on malformed input.
std::vector<MessageRecord> parse_messages(const std::string& path);

/// Parses a headerless 40-column order book CSV.
std::vector<BookRecord> parse_book(const std::string& path);

/// Writes records back in the same 6-column format (round-trip exact).
void write_messages(const std::string& path, const std::vector<MessageRecord>& records);

struct MarketOrderFeed {
    std::vector<MessageRecord> records;
    /// Index of the source row each output record aligns with (the last row
    /// of an aggregated run); used to pick the matching book snapshot.
    std::vector<std::size_t> source_row;
};

/// Replaces maximal runs of consecutive visible executions sharing a time
/// stamp and direction with one synthetic market-order record (type 6,
/// summed size, price of the first fill, direction flipped to the taker
/// side). Any other event type breaks a run. All other records pass through.
MarketOrderFeed infer_market_orders_indexed(const std::vector<MessageRecord>& messages);

/// Records-only convenience wrapper.
std::vector<MessageRecord> infer_market_orders(const std::vector<MessageRecord>& messages);

/// Per-transition order-flow imbalance from level-1 quotes:
/// e_n = q_b^n 1{P_b^n >= P_b^{n-1}} - q_b^{n-1} 1{P_b^n <= P_b^{n-1}}
///     - q_s^n 1{P_s^n <= P_s^{n-1}} + q_s^{n-1} 1{P_s^n >= P_s^{n-1}}.
/// Returns one value per record from the second on; a transition touching a
/// missing level-1 quote contributes 0.
std::vector<double> compute_ofi(const std::vector<BookRecord>& books);

/// Single-transition form used by the simulator's rolling context.
double ofi_step(std::int64_t bid_px_prev, std::int64_t bid_sz_prev, std::int64_t ask_px_prev,
                std::int64_t ask_sz_prev, std::int64_t bid_px, std::int64_t bid_sz,
                std::int64_t ask_px, std::int64_t ask_sz);

}  // namespace lobgen
