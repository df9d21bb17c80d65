#ifndef MWOPT_TESTS_INTEGRATE_HPP
#define MWOPT_TESTS_INTEGRATE_HPP

// Adaptive Simpson quadrature used as an independent oracle in tests.
// Deliberately self-contained: it must not share code with the library
// paths it checks.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

namespace mwopt_tests {

template <typename T, typename F>
T adaptive_simpson_rec(const F& f, double a, double b, T fa, T fm, T fb, T whole,
                       double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const T flm = f(lm);
    const T frm = f(rm);
    const T left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const T right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const T delta = left + right - whole;
    if (depth <= 0) throw std::runtime_error("adaptive_simpson: max depth reached");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

// Absolute-tolerance adaptive Simpson on [a, b]; T is double or complex<double>.
// The interval is pre-split into panels so oscillatory integrands cannot fool
// the first refinement step.
template <typename T, typename F>
T adaptive_simpson(const F& f, double a, double b, double abs_tol, int panels = 64,
                   int max_depth = 48) {
    T total{};
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double hi = (p + 1 == panels) ? b : lo + h;
        const T fa = f(lo);
        const T fb = f(hi);
        const T fm = f(0.5 * (lo + hi));
        const T whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += adaptive_simpson_rec<T>(f, lo, hi, fa, fm, fb, whole, abs_tol / panels,
                                         max_depth);
    }
    return total;
}

inline double integrate_real(const std::function<double(double)>& f, double a, double b,
                             double abs_tol = 1e-10) {
    return adaptive_simpson<double>(f, a, b, abs_tol);
}

inline std::complex<double> integrate_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double abs_tol = 1e-10) {
    return adaptive_simpson<std::complex<double>>(f, a, b, abs_tol);
}

// Orthonormal 1-D harmonic oscillator eigenfunctions in the dimensionless
// coordinate u (unit oscillator length), used to integrate matrix elements
// directly.  Independent of the library's quadrature_wavefunction.
inline double oscillator_eigenfunction(int n, double u) {
    const double pi = 3.14159265358979323846;
    double h0 = std::pow(pi, -0.25) * std::exp(-0.5 * u * u);
    if (n == 0) return h0;
    double h1 = std::sqrt(2.0) * u * h0;
    for (int k = 1; k < n; ++k) {
        const double h2 = std::sqrt(2.0 / (k + 1.0)) * u * h1 - std::sqrt(k / (k + 1.0)) * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

}  // namespace mwopt_tests

#endif
