#ifndef TAILSERIES_DETAIL_QUADRATURE_HPP
#define TAILSERIES_DETAIL_QUADRATURE_HPP

#include <cmath>
#include <functional>

namespace tailseries::detail {

// Adaptive Simpson with the usual Richardson error estimate.
inline double adaptive_simpson_step(const std::function<double(double)>& f, double a, double b,
                                    double fa, double fm, double fb, double whole, double tol,
                                    int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 48) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Integral over [a, inf) of a power-tailed integrand via y = a e^s; decay
// like y^{-p} with p > 0 becomes a clean exponential in s. `s_max` must be
// large enough that e^{-p s_max} is negligible.
inline double integrate_log_tail(const std::function<double(double)>& f, double a,
                                 double s_max = 90.0, double tol = 1e-12) {
    auto g = [&](double s) {
        const double y = a * std::exp(s);
        return f(y) * y;
    };
    return integrate(g, 0.0, s_max, tol);
}

}  // namespace tailseries::detail

#endif  // TAILSERIES_DETAIL_QUADRATURE_HPP
