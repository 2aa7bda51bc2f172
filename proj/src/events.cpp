#include "clmm/events.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "clmm/errors.hpp"

namespace clmm {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw DataError("line " + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view s, std::size_t line, const char* column) {
    double v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
        fail(line, std::string("column ") + column + " is not a finite number: '" + std::string(s) + "'");
    return v;
}

std::int64_t parse_int(std::string_view s, std::size_t line, const char* column) {
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end)
        fail(line, std::string("column ") + column + " is not an integer: '" + std::string(s) + "'");
    return v;
}

// Pulls RFC 4180 records from a buffer, tracking the physical line each
// record starts on.
class RecordReader {
public:
    explicit RecordReader(std::string text) : text_(std::move(text)) {
        if (text_.rfind("\xEF\xBB\xBF", 0) == 0) pos_ = 3;
    }

    bool next(std::vector<std::string>& fields, std::size_t& line) {
        if (pos_ >= text_.size()) return false;
        line = line_;
        fields.clear();
        std::string field;
        bool quoted = false, was_quoted = false;
        while (pos_ < text_.size()) {
            const char c = text_[pos_++];
            if (quoted) {
                if (c == '"') {
                    if (pos_ < text_.size() && text_[pos_] == '"') {
                        field.push_back('"');
                        ++pos_;
                    } else {
                        quoted = false;
                    }
                } else {
                    if (c == '\n') ++line_;
                    field.push_back(c);
                }
                continue;
            }
            if (c == '"') {
                if (!field.empty() || was_quoted) fail(line, "stray quote inside an unquoted field");
                quoted = was_quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
                was_quoted = false;
            } else if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') {
                // CRLF terminator; the LF ends the record on the next pass
            } else if (c == '\n') {
                ++line_;
                fields.push_back(std::move(field));
                return true;
            } else {
                if (was_quoted) fail(line, "characters after a closing quote");
                field.push_back(c);
            }
        }
        if (quoted) fail(line, "unterminated quoted field");
        fields.push_back(std::move(field));
        return true;
    }

private:
    std::string text_;
    std::size_t pos_{0};
    std::size_t line_{1};
};

}  // namespace

std::vector<std::string> split_csv_record(std::string_view line) {
    RecordReader r{std::string(line)};
    std::vector<std::string> fields;
    std::size_t n = 0;
    if (!r.next(fields, n)) return {""};
    return fields;
}

std::string csv_field(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw NumericError("cannot format number");
    return std::string(buf, ptr);
}

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::Swap: return "swap";
        case EventKind::Mint: return "mint";
        case EventKind::Burn: return "burn";
    }
    return "?";
}

std::string to_string(Side s) { return s == Side::Buy ? "buy" : "sell"; }

std::vector<MarketEvent> read_events(std::istream& in, const EventReadOptions& opt) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    RecordReader reader(std::move(text));
    std::vector<std::string> f;
    std::size_t line = 0;
    if (!reader.next(f, line)) fail(1, "empty file, expected header");
    {
        std::string header;
        for (std::size_t i = 0; i < f.size(); ++i) header += (i ? "," : "") + f[i];
        if (header != kEventHeader) fail(line, "header must be exactly '" + std::string(kEventHeader) + "'");
    }
    std::vector<MarketEvent> out;
    std::int64_t last_ts = INT64_MIN;
    while (reader.next(f, line)) {
        if (f.size() == 1 && f[0].empty()) continue;  // blank line
        if (f.size() != 12) fail(line, "expected 12 fields, found " + std::to_string(f.size()));
        MarketEvent e;
        e.ts = parse_int(f[0], line, "ts");
        if (e.ts < last_ts) fail(line, "timestamps must be nondecreasing");
        last_ts = e.ts;
        if (f[1] == "swap") {
            e.kind = EventKind::Swap;
            if (f[2] == "buy") e.side = Side::Buy;
            else if (f[2] == "sell") e.side = Side::Sell;
            else fail(line, "swap side must be buy or sell");
            e.amount_y = parse_double(f[3], line, "amount_y");
            e.exec_rate = parse_double(f[4], line, "exec_rate");
            e.fee_x = parse_double(f[5], line, "fee_x");
            e.pool_depth = parse_double(f[6], line, "pool_depth");
            e.rate_after = parse_double(f[7], line, "rate_after");
            if (!(e.amount_y >= 0)) fail(line, "amount_y must be nonnegative");
            if (!(e.exec_rate > 0) || !(e.rate_after > 0)) fail(line, "rates must be positive");
            if (!(e.pool_depth > 0)) fail(line, "pool_depth must be positive");
            if (!(e.fee_x >= 0)) fail(line, "fee_x must be nonnegative");
            for (int i = 8; i < 12; ++i)
                if (!f[static_cast<std::size_t>(i)].empty()) fail(line, "swap rows must leave LP columns empty");
            if (opt.fee_tier > 0) {
                const double expected = opt.fee_tier * e.notional();
                if (std::abs(e.fee_x - expected) > opt.fee_tolerance * std::max(expected, 1e-300))
                    fail(line, "fee_x is not fee_tier * notional");
            }
        } else if (f[1] == "mint" || f[1] == "burn") {
            e.kind = f[1] == "mint" ? EventKind::Mint : EventKind::Burn;
            for (int i = 2; i < 8; ++i)
                if (!f[static_cast<std::size_t>(i)].empty()) fail(line, "mint/burn rows must leave swap columns empty");
            e.wallet = f[8];
            if (e.wallet.empty()) fail(line, "wallet is required for mint/burn");
            e.tick_lower = parse_int(f[9], line, "tick_lower");
            e.tick_upper = parse_int(f[10], line, "tick_upper");
            if (!(e.tick_lower < e.tick_upper)) fail(line, "tick_lower must be below tick_upper");
            e.position_depth = parse_double(f[11], line, "position_depth");
            if (!(e.position_depth > 0)) fail(line, "position_depth must be positive");
        } else {
            fail(line, "kind must be swap, mint or burn");
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<MarketEvent> read_events_file(const std::string& path, const EventReadOptions& opt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open event file '" + path + "'");
    return read_events(in, opt);
}

void write_events(std::ostream& out, std::span<const MarketEvent> events) {
    out << kEventHeader << '\n';
    for (const auto& e : events) {
        out << e.ts << ',' << to_string(e.kind) << ',';
        if (e.is_swap()) {
            out << to_string(e.side) << ',' << format_double(e.amount_y) << ',' << format_double(e.exec_rate) << ','
                << format_double(e.fee_x) << ',' << format_double(e.pool_depth) << ',' << format_double(e.rate_after)
                << ",,,,\n";
        } else {
            out << ",,,,,," << csv_field(e.wallet) << ',' << e.tick_lower << ',' << e.tick_upper << ','
                << format_double(e.position_depth) << '\n';
        }
    }
}

double tick_to_rate(std::int64_t tick) { return std::pow(1.0001, static_cast<double>(tick)); }

double fee_free_rate(const MarketEvent& swap, double fee_tier) {
    return swap.side == Side::Buy ? swap.exec_rate * (1 - fee_tier) : swap.exec_rate / (1 - fee_tier);
}

std::vector<MarketEvent> swaps_only(std::span<const MarketEvent> events) {
    std::vector<MarketEvent> out;
    for (const auto& e : events)
        if (e.is_swap()) out.push_back(e);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.ts < b.ts; });
    return out;
}

}  // namespace clmm
