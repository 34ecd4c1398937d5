#include "tunnelkit/quadrature.hpp"

#include "tunnelkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace tunnelkit {

const std::array<double, 8> GaussKronrod15::x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};

const std::array<double, 8> GaussKronrod15::wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

const std::array<double, 4> GaussKronrod15::wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

std::array<double, 15> GaussKronrod15::nodes(double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::array<double, 15> out{};
    for (int i = 0; i < 7; ++i) {
        out[i] = c - h * x[i];
        out[14 - i] = c + h * x[i];
    }
    out[7] = c;
    return out;
}

std::array<double, 15> GaussKronrod15::kronrod_weights(double a, double b) {
    const double h = 0.5 * (b - a);
    std::array<double, 15> out{};
    for (int i = 0; i < 7; ++i) out[i] = out[14 - i] = h * wk[i];
    out[7] = h * wk[7];
    return out;
}

std::array<double, 15> GaussKronrod15::gauss_weights(double a, double b) {
    const double h = 0.5 * (b - a);
    std::array<double, 15> out{};
    for (int j = 0; j < 3; ++j) out[2 * j + 1] = out[13 - 2 * j] = h * wg[j];
    out[7] = h * wg[3];
    return out;
}

namespace {

struct Panel {
    double a, b;
    std::complex<double> value;
    double err, l1;
    bool operator<(const Panel& o) const { return err < o.err; }
};

Panel apply(const std::function<std::complex<double>(double)>& f, double a, double b) {
    const auto xs = GaussKronrod15::nodes(a, b);
    const auto wk = GaussKronrod15::kronrod_weights(a, b);
    const auto wg = GaussKronrod15::gauss_weights(a, b);
    std::complex<double> K = 0, G = 0;
    double l1 = 0;
    for (int i = 0; i < 15; ++i) {
        const auto y = f(xs[i]);
        K += wk[i] * y;
        G += wg[i] * y;
        l1 += wk[i] * std::abs(y);
    }
    return {a, b, K, std::abs(K - G), l1};
}

} // namespace

QuadratureResult integrate(const std::function<std::complex<double>(double)>& f, std::vector<double> breaks,
                           const QuadratureOptions& opt) {
    if (breaks.size() < 2) throw std::invalid_argument("integration needs at least one panel");
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    std::priority_queue<Panel> heap;
    QuadratureResult res;
    std::complex<double> total = 0;
    double err = 0, l1 = 0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        auto p = apply(f, breaks[i], breaks[i + 1]);
        res.evaluations += 15;
        total += p.value;
        err += p.err;
        l1 += p.l1;
        heap.push(p);
    }
    auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * l1); };
    while (err > target()) {
        if (res.evaluations + 30 > opt.max_evaluations) {
            const auto& w = heap.top();
            std::ostringstream msg;
            msg << "quadrature did not converge: error " << err << " > " << target() << ", worst panel ["
                << w.a << ", " << w.b << "] error " << w.err;
            throw NumericError(msg.str());
        }
        const Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            std::ostringstream msg;
            msg << "quadrature panel [" << worst.a << ", " << worst.b << "] cannot be split further (error "
                << worst.err << ")";
            throw NumericError(msg.str());
        }
        const auto left = apply(f, worst.a, mid);
        const auto right = apply(f, mid, worst.b);
        res.evaluations += 30;
        total += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        l1 += left.l1 + right.l1 - worst.l1;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed the drift of the running updates
    total = 0;
    err = 0;
    l1 = 0;
    res.panels = heap.size();
    std::vector<Panel> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    for (const auto& p : all) {
        total += p.value;
        err += p.err;
        l1 += p.l1;
    }
    res.value = total;
    res.error = err;
    res.l1 = l1;
    return res;
}

QuadratureResult integrate(const std::function<std::complex<double>(double)>& f, double a, double b,
                           const QuadratureOptions& opt) {
    return integrate(f, std::vector<double>{a, b}, opt);
}

} // namespace tunnelkit
