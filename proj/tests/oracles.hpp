#ifndef CLMM_TEST_ORACLES_HPP
#define CLMM_TEST_ORACLES_HPP

// Independent references used only by tests.

#include <array>
#include <cmath>
#include <cstddef>

namespace oracle {

struct OdeParams {
    double sigma, gamma, epsilon, speed, mean, vol, horizon, mu;
};

/// Backward RK4 on the coefficient system of w = log x + C q^2 + E q + F:
///   C' = 2 G C - 8k
///   E' = G E - (2 G pibar + psi^2) C - 4 eps k
///   F' = -G pibar E - eps^2 k / 2 - mu / 2 + sigma^2 / 8
/// with zero terminal values, integrated from T down to t.
inline std::array<double, 3> coefficients_rk4(const OdeParams& p, double t, std::size_t steps) {
    const double k = 1.0 / (2 * p.gamma + p.mu * p.mu * p.sigma * p.sigma);
    auto rhs = [&](const std::array<double, 3>& y) {
        const double C = y[0], E = y[1];
        return std::array<double, 3>{
            2 * p.speed * C - 8 * k,
            p.speed * E - (2 * p.speed * p.mean + p.vol * p.vol) * C - 4 * p.epsilon * k,
            -p.speed * p.mean * E - 0.5 * p.epsilon * p.epsilon * k - p.mu / 2 + p.sigma * p.sigma / 8};
    };
    std::array<double, 3> y{0, 0, 0};
    const double h = -(p.horizon - t) / static_cast<double>(steps);
    auto axpy = [](const std::array<double, 3>& a, double s, const std::array<double, 3>& b) {
        return std::array<double, 3>{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
    };
    for (std::size_t i = 0; i < steps; ++i) {
        const auto k1 = rhs(y);
        const auto k2 = rhs(axpy(y, h / 2, k1));
        const auto k3 = rhs(axpy(y, h / 2, k2));
        const auto k4 = rhs(axpy(y, h, k3));
        for (int j = 0; j < 3; ++j) y[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }
    return y;
}

inline double value_rk4(const OdeParams& p, double t, double wealth, double q, std::size_t steps) {
    const auto c = coefficients_rk4(p, t, steps);
    return std::log(wealth) + c[0] * q * q + c[1] * q + c[2];
}

}  // namespace oracle

#endif  // CLMM_TEST_ORACLES_HPP
