#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace tunnelkit {

// Gauss-Kronrod 7/15 abscissae on [-1, 1]; index 0..6 are the positive
// non-zero nodes in decreasing order, index 7 is the centre. Gauss nodes are
// the odd indices (1, 3, 5) plus the centre.
struct GaussKronrod15 {
    static const std::array<double, 8> x;
    static const std::array<double, 8> wk;
    static const std::array<double, 4> wg; // at x[1], x[3], x[5], x[7]

    // Panel nodes in ascending order on [a, b] with matching weights.
    static std::array<double, 15> nodes(double a, double b);
    static std::array<double, 15> kronrod_weights(double a, double b);
    static std::array<double, 15> gauss_weights(double a, double b); // zero on Kronrod-only nodes
};

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0;
    std::size_t max_evaluations = 4'000'000;
};

struct QuadratureResult {
    std::complex<double> value;
    double error = 0;       // sum of panel error estimates
    double l1 = 0;          // integral of |f|, Kronrod estimate
    std::size_t evaluations = 0;
    std::size_t panels = 0;
};

// Globally adaptive GK15 over [breaks[0], breaks.back()], bisecting the panel
// with the largest error estimate until sum(err) <= max(abs_tol, rel_tol * l1).
// Throws NumericError naming the worst panel when the budget runs out.
QuadratureResult integrate(const std::function<std::complex<double>(double)>& f, std::vector<double> breaks,
                           const QuadratureOptions& opt = {});

QuadratureResult integrate(const std::function<std::complex<double>(double)>& f, double a, double b,
                           const QuadratureOptions& opt = {});

} // namespace tunnelkit
