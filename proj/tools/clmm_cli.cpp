// Command-line front end: simulate, policy, estimate, backtest, benchmark,
// sweep-asymmetry, generate and breakeven.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clmm/backtest.hpp"
#include "clmm/errors.hpp"
#include "clmm/estimation.hpp"
#include "clmm/events.hpp"
#include "clmm/parallel.hpp"
#include "clmm/stochastics.hpp"
#include "clmm/strategy.hpp"
#include "clmm/synthetic.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace clmm;

namespace {

constexpr int kBadInput = 2;
constexpr int kNumericFailure = 3;

const char* const kUnits = R"(Units used by every subcommand

  time             simulation time in days; event timestamps in UNIX seconds
  sigma            rate volatility per sqrt(day)
  mu, drift        per day
  pi, fee rate     pool fee rate per day (fees per unit of pool value)
  gamma, epsilon   per day
  zeta             dimensionless, subtracted from the drift
  fee tier tau     dimensionless fraction of the notional (0.0005 = 5 bp)
  spread, legs     dimensionless; (Zu - Zl) / Z is close to the spread
  rates Z          units of X per unit of Y
  depth kappa      sqrt(X * Y)
  money columns    X, i.e. USD-equivalent for a USD-quoted pool: wealth,
                   position change, fees, rebalancing cost, gas
  report returns   per operation, as a fraction of wealth at the step start
  gas              USD per provide / withdraw / take action

Config files hold one key=value per line, keys named like the long flags
without dashes (e.g. gamma=5e-7). '#' starts a comment. Flags given on the
command line win over the file.

Exit codes: 0 success, 2 bad input, 3 numeric failure.
)";

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("config line " + std::to_string(n) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw DataError("config line " + std::to_string(n) + ": empty key");
        out.emplace_back(key, trim(line.substr(eq + 1)));
    }
    return out;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw DataError(std::string("bad number '") + item + "' in " + what);
        out.push_back(v);
    }
    if (out.empty()) throw DataError(std::string(what) + " is empty");
    return out;
}

std::vector<double> linspace(double from, double to, std::size_t n) {
    if (n == 0) throw DomainError("grid needs at least one point");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = n == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

fs::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory '" + dir + "'");
    return fs::path(dir);
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    writer(out);
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

json stats_json(const MonteCarloStats& s) {
    return {{"mean", s.mean}, {"std_error", s.std_error}, {"std_dev", s.std_dev}, {"count", s.count}};
}

json codes_json(std::uint32_t codes) {
    Admissibility a;
    a.codes = codes;
    return a.names();
}

std::string codes_text(std::uint32_t codes) {
    Admissibility a;
    a.codes = codes;
    std::string out;
    for (const auto& n : a.names()) out += (out.empty() ? "" : "|") + n;
    return out;
}

// ---- simulate -------------------------------------------------------------

struct SimulateOptions {
    std::uint64_t seed{0};
    std::string out{"."};
    double sigma{0.02}, mu{0.0};
    std::string drift_model{"constant"};
    double ou_speed{1.0}, ou_level{0.0}, ou_vol{0.0};
    double fee_speed{2.0}, fee_mean{0.002}, fee_vol{0.01};
    double epsilon{1e-4}, gamma{5e-7}, zeta{0.0};
    double rate0{100.0}, fee_rate0{0.02}, wealth0{1.0};
    double horizon{1.0};
    std::size_t steps{1440}, paths{1000}, write_paths{1};
    unsigned workers{0};
    double spread{0.0};
};

int run_simulate(const SimulateOptions& o) {
    ModelParams p;
    p.sigma = o.sigma;
    if (o.drift_model == "constant") p.drift = std::make_shared<ConstantDrift>(o.mu);
    else if (o.drift_model == "ou") p.drift = std::make_shared<OrnsteinUhlenbeckDrift>(o.mu, o.ou_speed, o.ou_level, o.ou_vol);
    else throw DataError("drift-model must be constant or ou");
    p.fee_speed = o.fee_speed;
    p.fee_mean = o.fee_mean;
    p.fee_vol = o.fee_vol;
    p.epsilon = o.epsilon;
    p.gamma = o.gamma;
    p.zeta = o.zeta;
    p.validate();
    if (o.paths == 0 || o.steps == 0) throw DomainError("paths and steps must be positive");
    const TimeGrid grid{o.horizon / static_cast<double>(o.steps), o.steps};
    grid.validate();
    const InitialState init{o.rate0, o.fee_rate0, o.wealth0};
    const Policy policy = o.spread > 0 ? fixed_spread_policy(o.spread, 0.0, o.zeta) : optimal_policy(p);
    const auto dir = prepare_dir(o.out);

    const auto n = static_cast<Eigen::Index>(o.paths);
    Eigen::VectorXd log_wealth(n), wealth(n), pl(n), rate(n);
    parallel_for(o.paths, o.workers, [&](std::size_t i) {
        const auto b = simulate_bundle(p, init, policy, grid, o.seed, i);
        const auto k = static_cast<Eigen::Index>(i);
        const auto last = static_cast<Eigen::Index>(o.steps);
        log_wealth[k] = b.wealth.log_wealth[last];
        wealth[k] = b.wealth.wealth[last];
        pl[k] = b.wealth.pl[last];
        rate[k] = b.rate.rate[last];
        if (i < o.write_paths)
            write_file(dir / ("path_" + std::to_string(i) + ".csv"), [&](std::ostream& os) { write_bundle_csv(os, b); });
    });
    json summary = {{"seed", o.seed},
                    {"paths", o.paths},
                    {"steps", o.steps},
                    {"horizon_days", o.horizon},
                    {"policy", o.spread > 0 ? "fixed" : "optimal"},
                    {"terminal_log_wealth", stats_json(summarize(log_wealth))},
                    {"terminal_wealth", stats_json(summarize(wealth))},
                    {"terminal_pl", stats_json(summarize(pl))},
                    {"terminal_rate", stats_json(summarize(rate))}};
    write_file(dir / "summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
    return 0;
}

// ---- policy ---------------------------------------------------------------

struct PolicyOptions {
    double fee_rate{0.02}, sigma{0.02}, mu{0.0}, gamma{5e-7}, zeta{0.0}, epsilon{1e-4};
    double rate{100.0};
    std::int64_t tick_spacing{0};
    std::string format{"json"};
    std::string sweep{"none"};
    double from{0}, to{0};
    std::size_t points{20};
    std::string gamma_grid;
    std::string out;
};

json policy_json(const PolicyInputs& in, const PolicyOutput& r, double rate) {
    json j = {{"fee_rate", in.fee_rate}, {"sigma", in.sigma},        {"mu", in.drift},
              {"gamma", in.gamma},       {"zeta", in.zeta},          {"epsilon", in.epsilon},
              {"spread", r.spread},      {"delta_lower", r.delta_lower}, {"delta_upper", r.delta_upper},
              {"asymmetry", r.asymmetry}, {"threshold", r.threshold}, {"admissible", r.admissibility.ok()},
              {"codes", codes_json(r.admissibility.codes)}, {"floored", r.floored}};
    if (std::isfinite(r.delta_lower) && std::isfinite(r.delta_upper) && legs_in_domain(r.delta_lower, r.delta_upper)) {
        const auto range = range_from_spread(rate, r.delta_lower, r.delta_upper);
        j["range_lower"] = range.lower;
        j["range_upper"] = range.upper;
    } else {
        j["range_lower"] = nullptr;
        j["range_upper"] = nullptr;
    }
    return j;
}

int run_policy(const PolicyOptions& o) {
    const double tick_spread = o.tick_spacing > 0 ? tick_to_rate(o.tick_spacing) - 1.0 : 0.0;
    const PolicyInputs base{o.fee_rate, o.sigma, o.mu, o.gamma, o.zeta, o.epsilon};
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!o.out.empty()) {
        const auto dir = prepare_dir(o.out);
        const std::string name = o.sweep == "none" ? (o.format == "json" ? "policy.json" : "policy.csv") : "sweep.csv";
        file.open(dir / name, std::ios::binary);
        if (!file) throw DataError("cannot write into '" + o.out + "'");
        os = &file;
    }
    if (o.sweep == "none") {
        const auto r = evaluate_policy(base, tick_spread);
        if (o.format == "json") {
            *os << policy_json(base, r, o.rate).dump(2) << '\n';
            return 0;
        }
        if (o.format != "csv") throw DataError("format must be json or csv");
    }
    std::vector<double> values{o.fee_rate};
    if (o.sweep != "none") {
        if (o.sweep != "fee-rate" && o.sweep != "sigma" && o.sweep != "mu")
            throw DataError("sweep must be none, fee-rate, sigma or mu");
        values = linspace(o.from, o.to, o.points);
    }
    const std::vector<double> gammas = o.gamma_grid.empty() ? std::vector<double>{o.gamma} : parse_list(o.gamma_grid, "gamma-grid");
    *os << "gamma,fee_rate,sigma,mu,spread,delta_lower,delta_upper,asymmetry,threshold,range_lower,range_upper,"
           "admissible,codes\n";
    for (double g : gammas) {
        for (double v : values) {
            PolicyInputs in = base;
            in.gamma = g;
            if (o.sweep == "fee-rate") in.fee_rate = v;
            else if (o.sweep == "sigma") in.sigma = v;
            else if (o.sweep == "mu") in.drift = v;
            const auto r = evaluate_policy(in, tick_spread);
            double lo = std::numeric_limits<double>::quiet_NaN(), hi = lo;
            if (std::isfinite(r.delta_lower) && std::isfinite(r.delta_upper) &&
                legs_in_domain(r.delta_lower, r.delta_upper)) {
                const auto range = range_from_spread(o.rate, r.delta_lower, r.delta_upper);
                lo = range.lower;
                hi = range.upper;
            }
            *os << format_double(g) << ',' << format_double(in.fee_rate) << ',' << format_double(in.sigma) << ','
                << format_double(in.drift);
            for (double x : {r.spread, r.delta_lower, r.delta_upper, r.asymmetry, r.threshold, lo, hi})
                *os << ',' << (std::isfinite(x) ? format_double(x) : "nan");
            *os << ',' << (r.admissibility.ok() ? 1 : 0) << ',' << codes_text(r.admissibility.codes) << '\n';
        }
    }
    return 0;
}

// ---- estimate -------------------------------------------------------------

struct EstimateOptions {
    std::string events;
    std::string out;
    std::int64_t step{60}, in_sample{86400}, drift_window{300}, gamma_window{3600};
    double fee_tier{0.0005};
    std::size_t spreads{100};
};

int run_estimate(const EstimateOptions& o) {
    if (o.step <= 0 || o.in_sample < o.step || o.drift_window < o.step || o.drift_window > o.in_sample)
        throw DomainError("need 0 < step <= drift-window <= in-sample");
    const auto events = read_events_file(o.events);
    const auto swaps = swaps_only(events);
    if (swaps.empty()) throw DataError("event log holds no swaps");
    const RateBars bars = make_bars(swaps, o.step);
    const Eigen::Index window = o.in_sample / o.step, drift_bars = o.drift_window / o.step;
    const Eigen::Index last = bars.rate.size() - 1;
    if (last < window) throw DataError("swaps do not cover the in-sample window");

    // concentration cost from the whole file, positions recentred on the
    // last rate strictly before each window
    double gamma = std::numeric_limits<double>::quiet_NaN();
    json gamma_json = nullptr;
    try {
        RateSeries ref;
        for (const auto& e : swaps) {
            ref.time.push_back(e.ts + 1);
            ref.rate.push_back(e.rate_after);
        }
        FeeRevenueOptions fo;
        fo.start = swaps.front().ts + 1;
        fo.window = o.gamma_window;
        fo.fee_tier = o.fee_tier;
        const Eigen::VectorXd grid = default_spread_grid(o.spreads);
        Eigen::VectorXd revenue(grid.size());
        for (Eigen::Index i = 0; i < grid.size(); ++i) revenue[i] = realized_fee_revenue(swaps, ref, grid[i], fo);
        const auto g = estimate_gamma(grid, revenue, static_cast<double>(o.gamma_window) / kSecondsPerDay);
        gamma = g.gamma;
        gamma_json = {{"gamma", g.gamma}, {"fee_rate", g.fee_rate}, {"intercept", g.intercept},
                      {"slope", g.slope}, {"r_squared", g.r_squared}};
    } catch (const DataError& e) {
        std::cerr << "warning: no concentration cost estimate: " << e.what() << '\n';
    }

    std::ostringstream csv;
    csv << "ts,sigma,fee_rate,gamma,mu\n";
    const double window_days = static_cast<double>(window * o.step) / kSecondsPerDay;
    for (Eigen::Index b = window; b <= last; ++b) {
        const double sigma = estimate_sigma(bars.rate.segment(b - window, window + 1), static_cast<double>(o.step));
        double volume = 0.0;
        for (Eigen::Index k = b - window + 1; k <= b; ++k) volume += bars.volume[k];
        const double pi = estimate_pool_fee_rate(volume, bars.depth[b], bars.rate[b], o.fee_tier, window_days);
        Eigen::VectorXd times(drift_bars + 1);
        for (Eigen::Index k = 0; k <= drift_bars; ++k) times[k] = static_cast<double>(bars.time(b - drift_bars + k));
        const double mu = estimate_drift(bars.rate.segment(b - drift_bars, drift_bars + 1), times);
        csv << bars.time(b) << ',' << format_double(sigma) << ',' << format_double(pi) << ','
            << (std::isfinite(gamma) ? format_double(gamma) : "nan") << ',' << format_double(mu) << '\n';
    }
    if (o.out.empty()) {
        std::cout << csv.str();
        return 0;
    }
    const auto dir = prepare_dir(o.out);
    write_file(dir / "estimates.csv", [&](std::ostream& os) { os << csv.str(); });
    const json j = {{"rows", last - window + 1}, {"gamma_regression", gamma_json}};
    write_file(dir / "estimate.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    return 0;
}

// ---- backtest and benchmark -------------------------------------------------

struct BacktestOptions {
    std::string events;
    std::string out;
    BacktestConfig config;
    std::string drift_mode{"zero"};
    bool benchmark{false};
    std::size_t spread_bins{50};
};

json benchmark_json(const BenchmarkSummary& b) {
    auto s = [](const ComponentStats& c) { return json{{"mean", c.mean}, {"sd", c.std_dev}}; };
    return {{"pairs", b.pairs.size()},
            {"mints", b.mints},
            {"burns", b.burns},
            {"unmatched_mints", b.unmatched_mints},
            {"unmatched_burns", b.unmatched_burns},
            {"unpriced", b.unpriced},
            {"wallets", b.wallets},
            {"kept_fraction", b.kept_fraction},
            {"performance", s(b.performance)},
            {"fee_return", s(b.fee_return)},
            {"hold_days", s(b.hold_days)},
            {"spread", s(b.spread)},
            {"performance_per_minute", s(b.performance_per_minute)},
            {"fee_return_per_minute", s(b.fee_return_per_minute)}};
}

int run_backtest_cmd(BacktestOptions o) {
    if (o.drift_mode == "zero") o.config.drift_mode = DriftMode::Zero;
    else if (o.drift_mode == "estimated") o.config.drift_mode = DriftMode::Estimated;
    else throw DataError("drift-mode must be zero or estimated");
    o.config.validate();
    const auto events = read_events_file(o.events);
    const auto report = run_backtest(events, o.config);
    const auto dir = prepare_dir(o.out);
    write_file(dir / "report.csv", [&](std::ostream& os) { write_report_csv(os, report); });
    write_file(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, report); });
    write_file(dir / "spreads.csv",
               [&](std::ostream& os) { write_spread_distribution_csv(os, report.rows, o.spread_bins); });
    write_file(dir / "fee_rates.csv", [&](std::ostream& os) { write_fee_rate_csv(os, report.rows); });

    json aggregates = json::object();
    for (const auto& [name, value] : summary_entries(report))
        if (name.rfind("benchmark_", 0) != 0) aggregates[name] = value;
    const auto cap = fee_capacity(events, o.config.fee_tier);
    const auto& c = o.config;
    json summary = {
        {"config",
         {{"step", c.step}, {"in_sample", c.in_sample}, {"drift_window", c.drift_window}, {"gamma", c.gamma},
          {"epsilon", c.epsilon}, {"zeta", c.zeta}, {"gas_provide", c.gas.provide}, {"gas_withdraw", c.gas.withdraw},
          {"gas_take", c.gas.take}, {"wealth", c.initial_wealth}, {"fee_tier", c.fee_tier},
          {"tick_spacing", c.tick_spacing}, {"drift_mode", o.drift_mode}}},
        {"aggregates", aggregates},
        {"fee_capacity",
         {{"swaps", cap.swaps}, {"minutes", cap.minutes}, {"swaps_per_minute", cap.swaps_per_minute},
          {"volume_per_minute", cap.volume_per_minute}, {"fee_ceiling", cap.fee_ceiling}}}};
    const auto breakeven = breakeven_wealth(report.aggregates.total_without_gas.mean, c.gas.total());
    summary["breakeven_wealth"] = breakeven ? json(*breakeven) : json(nullptr);
    if (report.benchmark) summary["benchmark"] = benchmark_json(*report.benchmark);
    write_file(dir / "summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
    if (o.benchmark) {
        if (!report.benchmark) throw DataError("benchmark requested but the log has no mint/burn rows");
        write_file(dir / "benchmark.csv", [&](std::ostream& os) { write_benchmark_csv(os, *report.benchmark); });
    }
    return 0;
}

struct BenchmarkOptions {
    std::string events;
    std::string out;
    double fee_tier{0.0005};
};

int run_benchmark(const BenchmarkOptions& o) {
    const auto events = read_events_file(o.events);
    const auto b = extract_benchmark(events, o.fee_tier);
    if (o.out.empty()) {
        std::cout << benchmark_json(b).dump(2) << '\n';
        return 0;
    }
    const auto dir = prepare_dir(o.out);
    write_file(dir / "benchmark.csv", [&](std::ostream& os) { write_benchmark_csv(os, b); });
    write_file(dir / "benchmark.json", [&](std::ostream& os) { os << benchmark_json(b).dump(2) << '\n'; });
    return 0;
}

// ---- sweep-asymmetry ------------------------------------------------------

struct SweepOptions {
    std::string events;
    std::string out;
    std::string spreads;
    std::string asymmetries;
    std::string drift_edges{"-1,-0.5,-0.2,-0.05,0.05,0.2,0.5,1"};
    std::int64_t horizon{3600}, drift_step{300};
    double fee_tier{0.0005};
};

int run_sweep(const SweepOptions& o) {
    AsymmetrySweepConfig c;
    c.spreads = o.spreads.empty() ? linspace(0.0005, 0.05, 10) : parse_list(o.spreads, "spreads");
    c.asymmetries = o.asymmetries.empty() ? linspace(0.0, 1.0, 21) : parse_list(o.asymmetries, "asymmetries");
    c.drift_edges = parse_list(o.drift_edges, "drift-edges");
    c.horizon = o.horizon;
    c.drift_step = o.drift_step;
    c.fee_tier = o.fee_tier;
    const auto events = read_events_file(o.events);
    const auto cells = asymmetry_sweep(events, c);
    if (o.out.empty()) {
        write_asymmetry_csv(std::cout, cells);
        return 0;
    }
    const auto dir = prepare_dir(o.out);
    write_file(dir / "asymmetry.csv", [&](std::ostream& os) { write_asymmetry_csv(os, cells); });
    return 0;
}

// ---- generate -------------------------------------------------------------

struct GenerateOptions {
    std::string kind{"log"};
    std::uint64_t seed{0};
    std::string out;
    SyntheticLogConfig log;
    GammaDesignConfig design;
    bool exact{false};
};

int run_generate(GenerateOptions o) {
    std::vector<MarketEvent> events;
    if (o.kind == "log") {
        o.log.seed = o.seed;
        events = generate_synthetic_log(o.log);
    } else if (o.kind == "gamma") {
        o.design.seed = o.seed;
        o.design.noise = !o.exact;
        events = generate_gamma_design(o.design).swaps;
    } else {
        throw DataError("kind must be log or gamma");
    }
    const fs::path path(o.out);
    if (path.has_parent_path()) prepare_dir(path.parent_path().string());
    write_file(path, [&](std::ostream& os) { write_events(os, events); });
    return 0;
}

// ---- breakeven ------------------------------------------------------------

int run_breakeven(double ret, double gas) {
    const auto w = breakeven_wealth(ret, gas);
    json j = {{"return_per_operation", ret}, {"gas_per_operation", gas}, {"breakeven", w.has_value()},
              {"wealth", w ? json(*w) : json(nullptr)}};
    std::cout << j.dump(2) << '\n';
    return 0;
}

// Move --config out of argv and splice its entries in right after the
// subcommand name, so that later command-line flags take precedence.
std::vector<std::string> expand_config(const CLI::App& app, int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (config.empty()) return args;
    std::size_t at = args.size();
    const CLI::App* sub = nullptr;
    for (std::size_t i = 0; i < args.size() && !sub; ++i) {
        for (const auto* s : app.get_subcommands({})) {
            if (s->get_name() == args[i]) {
                sub = s;
                at = i + 1;
                break;
            }
        }
    }
    if (!sub) throw DataError("--config needs a subcommand");
    std::vector<std::string> injected;
    for (const auto& [key, value] : read_config(config)) {
        const std::string flag = "--" + key;
        if (sub->get_option_no_throw(flag)) {
            injected.push_back(flag + "=" + value);
            continue;
        }
        bool known = false;
        for (const auto* s : app.get_subcommands({})) known = known || s->get_option_no_throw(flag) != nullptr;
        if (!known) throw DataError("unknown config key '" + key + "'");
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), injected.begin(), injected.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Concentrated-liquidity LP simulator, strategy engine and backtester"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(0, 1);
    bool units = false;
    std::string config_path;
    app.add_flag("--units", units, "Print the units used by every input and output, then exit");
    app.add_option("--config", config_path, "key=value file; command-line flags win");

    SimulateOptions sim;
    auto* s = app.add_subcommand("simulate", "Monte Carlo paths of rate, fee rate, wealth and PL");
    s->add_option("--seed", sim.seed, "Master seed")->required();
    s->add_option("--out", sim.out, "Output directory");
    s->add_option("--sigma", sim.sigma, "Rate volatility per sqrt(day)");
    s->add_option("--mu", sim.mu, "Drift per day (initial drift for ou)");
    s->add_option("--drift-model", sim.drift_model, "constant or ou");
    s->add_option("--ou-speed", sim.ou_speed);
    s->add_option("--ou-level", sim.ou_level);
    s->add_option("--ou-vol", sim.ou_vol);
    s->add_option("--fee-speed", sim.fee_speed, "CIR mean-reversion speed per day");
    s->add_option("--fee-mean", sim.fee_mean, "Long-run mean of pi - eta per day");
    s->add_option("--fee-vol", sim.fee_vol, "CIR volatility");
    s->add_option("--epsilon", sim.epsilon);
    s->add_option("--gamma", sim.gamma);
    s->add_option("--zeta", sim.zeta);
    s->add_option("--rate0", sim.rate0);
    s->add_option("--fee-rate0", sim.fee_rate0);
    s->add_option("--wealth0", sim.wealth0);
    s->add_option("--horizon", sim.horizon, "Days");
    s->add_option("--steps", sim.steps);
    s->add_option("--paths", sim.paths);
    s->add_option("--write-paths", sim.write_paths, "Number of path CSVs to write");
    s->add_option("--workers", sim.workers, "Threads, 0 for all cores");
    s->add_option("--spread", sim.spread, "Fixed spread; 0 uses the optimal policy");

    PolicyOptions pol;
    auto* p = app.add_subcommand("policy", "Closed-form spread, legs and admissibility, with sweeps");
    p->add_option("--fee-rate", pol.fee_rate, "Pool fee rate pi per day");
    p->add_option("--sigma", pol.sigma);
    p->add_option("--mu", pol.mu);
    p->add_option("--gamma", pol.gamma);
    p->add_option("--zeta", pol.zeta);
    p->add_option("--epsilon", pol.epsilon);
    p->add_option("--rate", pol.rate, "Marginal rate used for the range columns");
    p->add_option("--tick-spacing", pol.tick_spacing, "Floor a zero spread at one tick range");
    p->add_option("--format", pol.format, "json or csv");
    p->add_option("--sweep", pol.sweep, "none, fee-rate, sigma or mu");
    p->add_option("--from", pol.from);
    p->add_option("--to", pol.to);
    p->add_option("--points", pol.points);
    p->add_option("--gamma-grid", pol.gamma_grid, "Comma-separated gamma values");
    p->add_option("--out", pol.out, "Output directory; stdout if omitted");

    EstimateOptions est;
    auto* e = app.add_subcommand("estimate", "Rolling sigma, pi, mu and the gamma regression from an event log");
    e->add_option("--events", est.events)->required();
    e->add_option("--out", est.out, "Output directory; stdout if omitted");
    e->add_option("--step", est.step, "Seconds");
    e->add_option("--in-sample", est.in_sample, "Seconds");
    e->add_option("--drift-window", est.drift_window, "Seconds");
    e->add_option("--gamma-window", est.gamma_window, "Seconds a hypothetical position is held");
    e->add_option("--fee-tier", est.fee_tier);
    e->add_option("--spreads", est.spreads, "Points on the spread grid");

    BacktestOptions bt;
    auto* b = app.add_subcommand("backtest", "Replay the one-step rebalancing protocol over an event log");
    b->add_option("--events", bt.events)->required();
    b->add_option("--out", bt.out)->required();
    b->add_option("--step", bt.config.step, "Seconds");
    b->add_option("--in-sample", bt.config.in_sample, "Seconds");
    b->add_option("--drift-window", bt.config.drift_window, "Seconds");
    b->add_option("--drift-mode", bt.drift_mode, "zero or estimated");
    b->add_option("--gamma", bt.config.gamma);
    b->add_option("--epsilon", bt.config.epsilon);
    b->add_option("--zeta", bt.config.zeta);
    b->add_option("--gas-provide", bt.config.gas.provide, "USD");
    b->add_option("--gas-withdraw", bt.config.gas.withdraw, "USD");
    b->add_option("--gas-take", bt.config.gas.take, "USD");
    b->add_option("--wealth", bt.config.initial_wealth, "Initial wealth in X");
    b->add_option("--fee-tier", bt.config.fee_tier);
    b->add_option("--tick-spacing", bt.config.tick_spacing);
    b->add_option("--spread-bins", bt.spread_bins);
    b->add_flag("--benchmark", bt.benchmark, "Also write the paired mint/burn table");

    BenchmarkOptions bm;
    auto* m = app.add_subcommand("benchmark", "Pair mints with burns and measure realised LP performance");
    m->add_option("--events", bm.events)->required();
    m->add_option("--out", bm.out, "Output directory; stdout if omitted");
    m->add_option("--fee-tier", bm.fee_tier);

    SweepOptions sw;
    auto* a = app.add_subcommand("sweep-asymmetry", "Fee-maximising asymmetry per spread and drift bin");
    a->add_option("--events", sw.events)->required();
    a->add_option("--out", sw.out, "Output directory; stdout if omitted");
    a->add_option("--spreads", sw.spreads, "Comma-separated spreads");
    a->add_option("--asymmetries", sw.asymmetries, "Comma-separated asymmetries in [0, 1]");
    a->add_option("--drift-edges", sw.drift_edges, "Comma-separated drift bin edges per day");
    a->add_option("--horizon", sw.horizon, "Seconds a position is held");
    a->add_option("--drift-step", sw.drift_step, "Seconds between rates in the drift estimate");
    a->add_option("--fee-tier", sw.fee_tier);

    GenerateOptions gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic event log");
    g->add_option("--kind", gen.kind, "log or gamma");
    g->add_option("--seed", gen.seed)->required();
    g->add_option("--out", gen.out, "Output CSV file")->required();
    g->add_option("--events", gen.log.events, "Rows in a log");
    g->add_option("--sigma", gen.log.sigma);
    g->add_option("--mu", gen.log.drift);
    g->add_option("--rate", gen.log.rate);
    g->add_option("--depth", gen.log.depth);
    g->add_option("--noise-per-minute", gen.log.noise_per_minute);
    g->add_option("--noise-size", gen.log.noise_size);
    g->add_option("--fee-rate", gen.design.fee_rate, "gamma design: pool fee rate");
    g->add_option("--gamma", gen.design.gamma, "gamma design: concentration cost");
    g->add_option("--windows", gen.design.windows, "gamma design: windows");
    g->add_option("--swaps-per-window", gen.design.swaps_per_window);
    g->add_flag("--exact", gen.exact, "gamma design without noise");

    double be_return = 0, be_gas = 84.8;
    auto* k = app.add_subcommand("breakeven", "Wealth at which gas equals the per-operation return");
    k->add_option("--return", be_return, "Per-operation return as a fraction")->required();
    k->add_option("--gas", be_gas, "Gas per operation in USD");

    try {
        auto args = expand_config(app, argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : kBadInput;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kBadInput;
    }
    if (units) {
        std::cout << kUnits;
        return 0;
    }
    try {
        if (s->parsed()) return run_simulate(sim);
        if (p->parsed()) return run_policy(pol);
        if (e->parsed()) return run_estimate(est);
        if (b->parsed()) return run_backtest_cmd(bt);
        if (m->parsed()) return run_benchmark(bm);
        if (a->parsed()) return run_sweep(sw);
        if (g->parsed()) return run_generate(gen);
        if (k->parsed()) return run_breakeven(be_return, be_gas);
        std::cout << app.help();
        return kBadInput;
    } catch (const NumericError& err) {
        std::cerr << "numeric failure: " << err.what() << '\n';
        return kNumericFailure;
    } catch (const LiquidityExhausted& err) {
        std::cerr << "numeric failure: " << err.what() << '\n';
        return kNumericFailure;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kBadInput;
    }
}
