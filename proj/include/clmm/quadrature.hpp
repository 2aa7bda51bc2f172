#ifndef CLMM_QUADRATURE_HPP
#define CLMM_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <sstream>

#include "clmm/errors.hpp"

namespace clmm {

struct QuadratureOptions {
    double rel_tol{1e-13};
    double abs_tol{1e-300};
    int max_depth{48};
};

namespace detail {

template <typename F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol, int depth,
                    int max_depth, int& deepest) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth > deepest) deepest = depth;
    if (std::abs(diff) <= 15.0 * tol || m <= a || b <= m) return left + right + diff / 15.0;
    if (depth >= max_depth) {
        std::ostringstream msg;
        msg << "adaptive Simpson did not converge on [" << a << ", " << b << "]: local error " << std::abs(diff) / 15.0
            << " vs tolerance " << tol << " at depth " << depth;
        throw NumericError(msg.str());
    }
    return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1, max_depth, deepest) +
           simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1, max_depth, deepest);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b]. The tolerance is relative
/// to a coarse first estimate of |integral|. Throws NumericError with the
/// offending subinterval when refinement runs out of depth.
template <typename F>
double integrate(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
    if (a == b) return 0.0;
    if (b < a) return -integrate(f, b, a, opt);
    // Seed with a composite estimate on 8 panels so the tolerance scale is
    // not fooled by an integrand that happens to vanish at three points.
    constexpr int panels = 8;
    const double h = (b - a) / panels;
    double xs[panels + 1], fs[panels + 1], mids[panels];
    for (int i = 0; i <= panels; ++i) {
        xs[i] = i == panels ? b : a + h * i;
        fs[i] = f(xs[i]);
    }
    double coarse = 0.0, coarse_abs = 0.0;
    double pieces[panels];
    for (int i = 0; i < panels; ++i) {
        mids[i] = f(0.5 * (xs[i] + xs[i + 1]));
        pieces[i] = (xs[i + 1] - xs[i]) / 6.0 * (fs[i] + 4.0 * mids[i] + fs[i + 1]);
        coarse += pieces[i];
        coarse_abs += std::abs(pieces[i]);
    }
    const double tol = std::max(opt.rel_tol * coarse_abs, opt.abs_tol) / panels;
    int deepest = 0;
    double total = 0.0;
    for (int i = 0; i < panels; ++i)
        total += detail::simpson_step(f, xs[i], xs[i + 1], fs[i], mids[i], fs[i + 1], pieces[i], tol, 0,
                                      opt.max_depth, deepest);
    if (!std::isfinite(total)) throw NumericError("quadrature produced a non-finite value");
    return total;
}

}  // namespace clmm

#endif  // CLMM_QUADRATURE_HPP
