#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace tunnelkit {

// Piecewise barycentric interpolation on Chebyshev points of the second kind.
// Panels are bisected until the interpolant matches direct evaluation at the
// midpoints between nodes to rel_tol times the largest |f| seen (or abs_tol).
class AmplitudeTable {
public:
    using Fn = std::function<std::complex<double>(double)>;

    struct Options {
        int degree = 32; // nodes per panel = degree + 1, at most 64
        double rel_tol = 1e-9;
        double abs_tol = 0;
        int initial_panels = 8;
        int max_depth = 40;
    };

    AmplitudeTable() = default;
    // hints: interior points where sharp features are known to sit; they become breakpoints.
    AmplitudeTable(const Fn& f, double a, double b, const std::vector<double>& hints = {});
    AmplitudeTable(const Fn& f, double a, double b, const std::vector<double>& hints, const Options& opt);

    std::complex<double> operator()(double x) const;

    double lower() const { return breaks_.front(); }
    double upper() const { return breaks_.back(); }
    const std::vector<double>& breakpoints() const { return breaks_; }
    std::size_t panels() const { return breaks_.size() - 1; }
    std::size_t evaluations() const { return evaluations_; }
    double scale() const { return scale_; }
    // Largest midpoint discrepancy relative to scale() over the accepted panels.
    double max_error() const { return max_error_; }

private:
    struct Panel {
        double a, b;
        std::vector<std::complex<double>> values;
    };
    void build(const Fn& f, double a, double b, int depth, std::vector<Panel>& out);

    Options opt_;
    std::vector<double> breaks_;
    std::vector<Panel> panels_;
    std::vector<double> unit_nodes_; // on [-1, 1], ascending
    std::vector<double> bary_;
    std::size_t evaluations_ = 0;
    double scale_ = 0;
    double max_error_ = 0;
    std::vector<double> accepted_error_; // absolute, per panel
};

} // namespace tunnelkit
