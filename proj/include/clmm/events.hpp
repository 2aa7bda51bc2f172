#ifndef CLMM_EVENTS_HPP
#define CLMM_EVENTS_HPP

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clmm/core.hpp"

namespace clmm {

enum class EventKind { Swap, Mint, Burn };

/// One row of an exported pool log. Swap fields are meaningful for swaps,
/// wallet/tick/position fields for mints and burns. Side::Buy means the
/// liquidity taker buys Y (the rate goes up).
struct MarketEvent {
    std::int64_t ts{0};  // UNIX seconds
    EventKind kind{EventKind::Swap};
    Side side{Side::Buy};
    double amount_y{0};
    double exec_rate{0};
    double fee_x{0};
    double pool_depth{0};
    double rate_after{0};
    std::string wallet;
    std::int64_t tick_lower{0};
    std::int64_t tick_upper{0};
    double position_depth{0};

    bool is_swap() const { return kind == EventKind::Swap; }
    /// amount_y * exec_rate, in X
    double notional() const { return amount_y * exec_rate; }
};

inline constexpr std::string_view kEventHeader =
    "ts,kind,side,amount_y,exec_rate,fee_x,pool_depth,rate_after,wallet,tick_lower,tick_upper,position_depth";

struct EventReadOptions {
    /// When positive, swap fees must equal fee_tier * notional within
    /// fee_tolerance relative.
    double fee_tier{0};
    double fee_tolerance{1e-6};
};

/// Parse and validate an event log. Throws DataError naming the first bad
/// line (1-based, header is line 1).
std::vector<MarketEvent> read_events(std::istream& in, const EventReadOptions& opt = {});
std::vector<MarketEvent> read_events_file(const std::string& path, const EventReadOptions& opt = {});

/// Write events with the exact header; numbers in shortest round-trip form.
void write_events(std::ostream& out, std::span<const MarketEvent> events);

/// Split one CSV record (RFC 4180). `line` must not contain the record
/// terminator. Throws DataError on unbalanced quotes.
std::vector<std::string> split_csv_record(std::string_view line);

/// Quote a field if it contains a comma, quote or line break.
std::string csv_field(std::string_view field);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Rate of a tick index: 1.0001^tick.
double tick_to_rate(std::int64_t tick);

/// Rate a swap traded at with the fee removed: exec (1 - tau) for buys,
/// exec / (1 - tau) for sells. This is the rate tested against LP ranges.
double fee_free_rate(const MarketEvent& swap, double fee_tier);

/// Swaps only, stably sorted by timestamp.
std::vector<MarketEvent> swaps_only(std::span<const MarketEvent> events);

std::string to_string(EventKind k);
std::string to_string(Side s);

}  // namespace clmm

#endif  // CLMM_EVENTS_HPP
