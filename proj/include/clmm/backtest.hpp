#ifndef CLMM_BACKTEST_HPP
#define CLMM_BACKTEST_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clmm/events.hpp"
#include "clmm/strategy.hpp"

namespace clmm {

enum class DriftMode { Zero, Estimated };

struct GasFees {
    double provide{30.7};
    double withdraw{24.5};
    double take{29.6};

    double total() const { return provide + withdraw + take; }
};

struct BacktestConfig {
    std::int64_t step{60};           // seconds between rebalances
    std::int64_t in_sample{86400};   // estimation window, seconds
    std::int64_t drift_window{300};  // seconds of bars behind a drift estimate
    double gamma{5e-7};
    double epsilon{1e-4};
    double zeta{0};
    GasFees gas;
    double initial_wealth{1e6};
    double fee_tier{0.0005};
    std::int64_t tick_spacing{10};
    DriftMode drift_mode{DriftMode::Zero};

    void validate() const;
};

/// One rebalancing period [t_i, t_{i+1}). Money columns are in X. Withdrawn
/// rows carry zero legs, range and depth.
struct BacktestRow {
    std::int64_t ts{0};
    bool deployed{false};
    std::uint32_t codes{0};  // Violation bits behind a withdrawal
    double rate{0};
    double sigma{0};
    double fee_rate{0};
    double drift{0};
    double delta_lower{0};
    double delta_upper{0};
    double range_lower{0};
    double range_upper{0};
    double wealth{0};
    double position_depth{0};
    double position_change{0};
    double fees{0};
    double rebalancing{0};
    double gas{0};
    double total{0};
};

struct ComponentStats {
    double mean{0};
    double std_dev{0};
};

/// Per-operation returns (component / wealth at the start of the step) over
/// deployed rows.
struct BacktestAggregates {
    std::size_t operations{0};
    std::size_t withdrawn{0};
    ComponentStats position_change;
    ComponentStats fees;
    ComponentStats rebalancing;
    ComponentStats gas;
    ComponentStats total_without_gas;
    ComponentStats total;
    double final_wealth{0};
    double fee_account{0};
    double gas_paid{0};
};

struct BenchmarkPair {
    std::size_t mint_index{0};  // row in the event list
    std::size_t burn_index{0};
    std::string wallet;
    double depth{0};
    double rate_open{0};
    double rate_close{0};
    double value_open{0};
    double value_close{0};
    double performance{0};  // alpha_T / x0 - 1
    double fee_return{0};   // fees / x0
    double hold_days{0};
    double spread{0};       // (Zu - Zl) / Z0
};

struct BenchmarkSummary {
    std::vector<BenchmarkPair> pairs;
    std::size_t mints{0};
    std::size_t burns{0};
    std::size_t unmatched_mints{0};
    std::size_t unmatched_burns{0};
    std::size_t unpriced{0};  // pairs dropped for lack of a prior swap
    std::size_t wallets{0};
    double kept_fraction{0};  // paired LP operations / all LP operations
    ComponentStats performance;
    ComponentStats fee_return;
    ComponentStats hold_days;
    ComponentStats spread;
    // Per-minute normalisation over pairs held for a positive time.
    ComponentStats performance_per_minute;
    ComponentStats fee_return_per_minute;
};

struct BacktestReport {
    BacktestConfig config;
    std::vector<BacktestRow> rows;
    BacktestAggregates aggregates;
    std::optional<BenchmarkSummary> benchmark;
};

/// Replay the one-step rebalancing protocol over a time-sorted event log.
/// Throws DataError when the swaps do not cover in_sample plus one step.
BacktestReport run_backtest(std::span<const MarketEvent> events, const BacktestConfig& config);

BacktestAggregates aggregate(std::span<const BacktestRow> rows);

/// Pair each mint with the earliest later burn of the same wallet and depth
/// (relative tolerance 1e-9) and value both legs at the last prior swap rate.
BenchmarkSummary extract_benchmark(std::span<const MarketEvent> events, double fee_tier);

struct AsymmetrySweepConfig {
    std::vector<double> spreads;
    std::vector<double> asymmetries;
    std::vector<double> drift_edges;  // bin edges, per day, increasing
    std::int64_t horizon{3600};
    std::int64_t drift_step{300};     // bar step for the realised drift
    double fee_tier{0.0005};
};

struct AsymmetryCell {
    double drift_lower{0};
    double drift_upper{0};
    std::size_t windows{0};
    double spread{0};
    double best_asymmetry{0};
    double best_revenue{0};
};

/// Fee revenue of a unit-wealth position per (spread, asymmetry), averaged
/// over hour-long windows grouped by realised drift; the argmax asymmetry per
/// bin and spread. Ties go to the asymmetry closest to 1/2. Empty bins are
/// omitted.
std::vector<AsymmetryCell> asymmetry_sweep(std::span<const MarketEvent> events, const AsymmetrySweepConfig& config);

/// gas / return; nullopt when the return is not positive.
std::optional<double> breakeven_wealth(double return_per_op, double gas_per_op);

struct FeeCapacity {
    std::size_t swaps{0};
    std::size_t minutes{0};
    double swaps_per_minute{0};
    double volume_per_minute{0};
    double fee_ceiling{0};  // tau * volume per minute * horizon minutes
};

FeeCapacity fee_capacity(std::span<const MarketEvent> events, double fee_tier, double horizon_minutes = 1.0);

/// "%.12e", the format of every report number.
std::string format_report_number(double v);

void write_report_csv(std::ostream& out, const BacktestReport& report);
/// metric,value lines; the benchmark block is included when present.
void write_summary_csv(std::ostream& out, const BacktestReport& report);
/// Histogram of deployed spreads on `bins` equal bins over [0, max].
void write_spread_distribution_csv(std::ostream& out, std::span<const BacktestRow> rows, std::size_t bins = 50);
void write_fee_rate_csv(std::ostream& out, std::span<const BacktestRow> rows);
void write_benchmark_csv(std::ostream& out, const BenchmarkSummary& summary);
void write_asymmetry_csv(std::ostream& out, std::span<const AsymmetryCell> cells);

/// Flat name/value list of the aggregates, shared by the CSV and JSON
/// summaries.
std::vector<std::pair<std::string, double>> summary_entries(const BacktestReport& report);

}  // namespace clmm

#endif  // CLMM_BACKTEST_HPP
