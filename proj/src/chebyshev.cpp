#include "tunnelkit/chebyshev.hpp"

#include "tunnelkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tunnelkit {

namespace {

std::complex<double> barycentric(const std::vector<double>& nodes, const std::vector<double>& bary,
                                 const std::vector<std::complex<double>>& vals, double u) {
    std::complex<double> num = 0;
    double den = 0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double diff = u - nodes[j];
        if (diff == 0) return vals[j];
        const double c = bary[j] / diff;
        num += c * vals[j];
        den += c;
    }
    return num / den;
}

} // namespace

AmplitudeTable::AmplitudeTable(const Fn& f, double a, double b, const std::vector<double>& hints)
    : AmplitudeTable(f, a, b, hints, Options{}) {}

AmplitudeTable::AmplitudeTable(const Fn& f, double a, double b, const std::vector<double>& hints,
                               const Options& opt)
    : opt_(opt) {
    if (!(b > a)) throw std::invalid_argument("table interval must be non-empty");
    if (opt_.degree < 2 || opt_.degree > 64) throw std::invalid_argument("table degree must lie in [2, 64]");
    const int n = opt_.degree;
    unit_nodes_.resize(n + 1);
    bary_.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
        unit_nodes_[j] = -std::cos(std::numbers::pi * j / n);
        bary_[j] = (j % 2 ? -1.0 : 1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
    }

    std::vector<double> starts;
    for (int i = 0; i <= opt_.initial_panels; ++i) starts.push_back(a + (b - a) * i / opt_.initial_panels);
    for (double h : hints)
        if (h > a && h < b) starts.push_back(h);
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

    std::vector<Panel> out;
    for (std::size_t i = 0; i + 1 < starts.size(); ++i) build(f, starts[i], starts[i + 1], 0, out);
    std::sort(out.begin(), out.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    panels_ = std::move(out);
    breaks_.clear();
    for (const auto& p : panels_) breaks_.push_back(p.a);
    breaks_.push_back(panels_.back().b);
    max_error_ = 0;
    for (double e : accepted_error_) max_error_ = std::max(max_error_, e / scale_);
    if (scale_ == 0) max_error_ = 0;
}

void AmplitudeTable::build(const Fn& f, double a, double b, int depth, std::vector<Panel>& out) {
    const int n = opt_.degree;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    Panel p{a, b, std::vector<std::complex<double>>(n + 1)};
    for (int j = 0; j <= n; ++j) {
        const double x = j == 0 ? a : j == n ? b : c + h * unit_nodes_[j];
        p.values[j] = f(x);
        scale_ = std::max(scale_, std::abs(p.values[j]));
    }
    evaluations_ += n + 1;
    double err = 0;
    for (int j = 0; j < n; ++j) {
        const double u = 0.5 * (unit_nodes_[j] + unit_nodes_[j + 1]);
        const auto direct = f(c + h * u);
        scale_ = std::max(scale_, std::abs(direct));
        err = std::max(err, std::abs(barycentric(unit_nodes_, bary_, p.values, u) - direct));
    }
    evaluations_ += n;
    if (err <= std::max(opt_.rel_tol * scale_, opt_.abs_tol)) {
        accepted_error_.push_back(err);
        out.push_back(std::move(p));
        return;
    }
    if (depth >= opt_.max_depth || !(c > a && c < b)) {
        std::ostringstream msg;
        msg << "amplitude table did not resolve panel [" << a << ", " << b << "] (error " << err / scale_
            << ")";
        throw NumericError(msg.str());
    }
    build(f, a, c, depth + 1, out);
    build(f, c, b, depth + 1, out);
}

std::complex<double> AmplitudeTable::operator()(double x) const {
    if (panels_.empty()) throw std::logic_error("empty amplitude table");
    if (x < breaks_.front() || x > breaks_.back()) throw std::out_of_range("outside amplitude table");
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t i = it == breaks_.begin() ? 0 : std::size_t(it - breaks_.begin()) - 1;
    if (i >= panels_.size()) i = panels_.size() - 1;
    const auto& p = panels_[i];
    if (x == p.a) return p.values.front();
    if (x == p.b) return p.values.back();
    const double u = (2 * x - p.a - p.b) / (p.b - p.a);
    return barycentric(unit_nodes_, bary_, p.values, u);
}

} // namespace tunnelkit
