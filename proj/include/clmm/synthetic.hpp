#ifndef CLMM_SYNTHETIC_HPP
#define CLMM_SYNTHETIC_HPP

#include <cstdint>
#include <vector>

#include "clmm/estimation.hpp"
#include "clmm/events.hpp"

namespace clmm {

/// A pool log driven by a latent geometric Brownian rate. Each minute holds
/// Poisson noise trades in its first 50 seconds and one arbitrage swap at
/// second 55 that moves the pool onto the latent rate. Trades crossing a tick
/// are split into one row per tick range. LP wallets mint and later burn
/// positions without moving the pool.
struct SyntheticLogConfig {
    std::uint64_t seed{1};
    std::size_t events{10000};
    std::int64_t start{1640995200};
    double rate{2000};
    double depth{2.8e6};
    double depth_wobble{0.2};  // range depth is depth (1 + wobble sin k)
    double fee_tier{0.0005};
    std::int64_t tick_spacing{10};
    std::int64_t grid_ranges{2000};  // tick ranges on each side of the start
    double sigma{0.01};              // per sqrt(day)
    double drift{0};                 // per day
    double noise_per_minute{1.5};
    double noise_size{30};          // mean Y size of a noise trade
    double mint_per_minute{0.05};
    double mean_hold_minutes{240};
    std::size_t wallets{6};
    double unmatched_fraction{0.1};  // mints whose burn never comes

    void validate() const;
};

std::vector<MarketEvent> generate_synthetic_log(const SyntheticLogConfig& config);

/// Swaps for a known concentration cost: within each window the pool pays
/// 2 kappa sqrt(Z) pi m in fees, spread over swaps whose distance from Z is
/// s / U with s = gamma / (8 pi) and U uniform, so that a symmetric position
/// of spread delta expects (4 pi / delta - gamma / delta^2) m in revenue.
/// Without noise the swaps are placed on the spread grid with weights that
/// make the identity exact at every grid point. Every swap reports Z as its
/// post-trade rate and a zero-size swap at start - 1 anchors the reference.
struct GammaDesignConfig {
    double fee_rate{0.02};
    double gamma{5e-7};
    double rate{2000};
    double depth{1e6};
    double fee_tier{0.0005};
    std::int64_t start{86400};
    std::int64_t window{3600};
    std::size_t windows{24};
    std::size_t swaps_per_window{6400};
    std::uint64_t seed{1};
    bool noise{true};
    std::vector<double> spreads;  // grid for the exact design; default grid if empty
};

struct GammaDesign {
    std::vector<MarketEvent> swaps;
    RateSeries reference;
    FeeRevenueOptions options;
    double horizon_days{0};
};

GammaDesign generate_gamma_design(const GammaDesignConfig& config);

}  // namespace clmm

#endif  // CLMM_SYNTHETIC_HPP
