#include "tunnelkit/scattering.hpp"

#include "tunnelkit/error.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tunnelkit {

namespace {

constexpr cplx I(0, 1);

void require_positive_momentum(double k) {
    if (!(std::isfinite(k) && k > 0)) throw std::invalid_argument("momentum must be positive and finite");
}

ScatteringData assemble(double k, cplx Ts, double S, cplx R) {
    ScatteringData sd;
    sd.k = k;
    sd.T_scaled = Ts;
    sd.log_scale = S;
    sd.R = R;
    const double scale = std::exp(-S);
    sd.T = Ts * scale;
    sd.abs_T = std::abs(Ts) * scale;
    sd.log_abs_T = std::log(std::abs(Ts)) - S;

    const double flux = std::norm(Ts) * scale * scale + std::norm(R);
    if (!(std::abs(flux - 1) <= 1e-8))
        throw NumericError("flux not conserved at k = " + std::to_string(k) + " (|T|^2+|R|^2 = " +
                           std::to_string(flux) + ")");
    const double overlap_scaled = (std::conj(Ts) * R).real();
    sd.w = overlap_scaled * scale;
    if (std::abs(sd.w) >= 1) throw NumericError("overlap |w| >= 1");
    // T - Re(T*R) R rewritten with 1 - |R|^2 = |T|^2 so the nearly reflecting case does not cancel.
    const double T2 = std::norm(Ts) * scale * scale;
    sd.A_scaled = (Ts * T2 - I * R * (std::conj(Ts) * R).imag()) / (1 - sd.w * sd.w);
    sd.A = sd.A_scaled * scale;
    sd.phi = std::arg(Ts);
    sd.chi = R == 0.0 ? 0.0 : std::arg(I * R * std::conj(Ts));
    return sd;
}

// Real unimodular transfer matrix acting on (g, F g') across one segment.
struct Mat {
    double a11 = 1, a12 = 0, a21 = 0, a22 = 1;
};

Mat mul(const Mat& x, const Mat& y) {
    return {x.a11 * y.a11 + x.a12 * y.a21, x.a11 * y.a12 + x.a12 * y.a22,
            x.a21 * y.a11 + x.a22 * y.a21, x.a21 * y.a12 + x.a22 * y.a22};
}

// With c = cos(q w), s = sin(q w)/q (hyperbolic analogues when kappa_sq < 0):
// M = [[c, s/F], [-F kappa_sq s, c]]. When scaled, exp(lambda w) is removed
// from evanescent segments and added to *log_scale.
Mat segment_matrix(double kappa_sq, double F, double w, bool scaled, double* log_scale) {
    double c = 0, s = 0;
    const double x = kappa_sq * w * w;
    if (std::abs(x) < 1e-4) {
        // even/odd Taylor series in x, exact to rounding at this size
        double tc = 1, ts = 1;
        c = 1;
        s = 1;
        for (int n = 1; n <= 6; ++n) {
            tc *= -x / double((2 * n - 1) * (2 * n));
            ts *= -x / double((2 * n) * (2 * n + 1));
            c += tc;
            s += ts;
        }
        s *= w;
    } else if (kappa_sq > 0) {
        const double q = std::sqrt(kappa_sq);
        c = std::cos(q * w);
        s = std::sin(q * w) / q;
    } else {
        const double lam = std::sqrt(-kappa_sq);
        if (scaled) {
            const double em = std::expm1(-2 * lam * w);
            c = 1 + 0.5 * em;
            s = -0.5 * em / lam;
            *log_scale += lam * w;
        } else {
            c = std::cosh(lam * w);
            s = std::sinh(lam * w) / lam;
        }
    }
    return {c, s / F, -F * kappa_sq * s, c};
}

} // namespace

double tunneling_momentum_limit(double V0, double m) {
    return std::sqrt(V0 * (2 * m + V0));
}

BarrierFunctions barrier_functions(double k, double V0, double m) {
    require_positive_momentum(k);
    if (!(V0 > 0)) throw std::domain_error("barrier height must be positive");
    const auto kin = relativistic_kinematics(k, m);
    if (k >= tunneling_momentum_limit(V0, m))
        throw std::domain_error("above-barrier regime: use transfer matrices");
    const double lam = evanescent_scale(kin.E, V0, m);
    if (!(lam > 0)) throw std::domain_error("above-barrier regime: use transfer matrices");
    BarrierFunctions bf;
    bf.lambda = lam;
    // rationalized e_k = (lambda/k)(E - m)/(m - (E - V0))
    bf.e = (k / lam) * (m + kin.E - V0) / (m + kin.E);
    bf.eta = 0.5 * (bf.e - 1 / bf.e);
    bf.rho = 0.5 * (bf.e + 1 / bf.e);
    return bf;
}

ScatteringData square_barrier_amplitudes(double k, double V0, double d, double m) {
    require_positive_momentum(k);
    if (!(d > 0)) throw std::invalid_argument("barrier width must be positive");
    if (V0 == 0) return assemble(k, 1.0, 0.0, 0.0);
    const auto bf = barrier_functions(k, V0, m);
    const double em = std::expm1(-2 * bf.lambda * d); // eps - 1
    const cplx den = (2 + em) + I * bf.eta * em;
    const cplx ph = std::polar(1.0, -k * d);
    const cplx Ts = 2.0 * ph / den;
    const cplx R = I * ph * bf.rho * em / den;
    return assemble(k, Ts, bf.lambda * d, R);
}

ScatteringData double_barrier_T(double k, double V0, double a, double r, double m) {
    require_positive_momentum(k);
    if (!(a > 0)) throw std::invalid_argument("barrier width must be positive");
    if (!(r >= 0)) throw std::invalid_argument("barrier separation must be non-negative");
    const auto bf = barrier_functions(k, V0, m);
    const double em = std::expm1(-2 * bf.lambda * a);
    const cplx q = (2 + em) + I * bf.eta * em;
    const double sq = bf.rho * em;
    const cplx den = q * q * std::polar(1.0, -k * r) + sq * sq * std::polar(1.0, k * r);
    const cplx Ts = 4.0 * std::polar(1.0, -k * (r + 2 * a)) / den;

    // reflection from the multiple-reflection sum of two shifted single barriers
    const cplx T0s = 2.0 * std::polar(1.0, -k * a) / q;
    const cplx R0 = I * std::polar(1.0, -k * a) * sq / q;
    const cplx ph = std::polar(1.0, k * (r + a));
    const double opaque = std::exp(-2 * bf.lambda * a);
    const cplx R = R0 / ph + T0s * T0s * opaque * R0 * ph / (1.0 - R0 * R0 * ph * ph);
    return assemble(k, Ts, 2 * bf.lambda * a, R);
}

cplx double_barrier_T_composed(double k, double V0, double a, double r, double m) {
    const auto s = square_barrier_amplitudes(k, V0, a, m);
    const cplx ph2 = std::polar(1.0, 2 * k * (r + a));
    return s.T * s.T / (1.0 - s.R * s.R * ph2);
}

ScatteringData piecewise_amplitudes(const PotentialProfile& profile, double k, Composition mode) {
    require_positive_momentum(k);
    const double m = profile.mass;
    const auto kin = relativistic_kinematics(k, m);
    const double Em = k * k / (kin.E + m); // E - m without cancellation
    const bool scaled = mode == Composition::scaled;

    Mat M;
    double S = 0;
    for (const auto& seg : profile.segments) {
        const double u = kin.E - seg.v;
        if (!(u > 0)) throw std::domain_error("segment height exceeds the particle energy");
        // (E - V)^2 - m^2 = (E - m - V)(E + m - V)
        const double kappa_sq = seg.v == 0 ? k * k : (Em - seg.v) * (u + m);
        const double F = 1.0 / (m + u);
        M = mul(segment_matrix(kappa_sq, F, seg.w, scaled, &S), M);
    }
    if (!scaled) {
        const double cond = M.a11 * M.a11 + M.a12 * M.a12 + M.a21 * M.a21 + M.a22 * M.a22;
        if (!(cond <= 1e12)) throw NumericError("opaque profile - use log-scaled composition");
    }

    const double d = profile.extent();
    const cplx beta = I * k / (m + kin.E);
    const cplx a = std::polar(1.0, -0.5 * k * d);
    const cplx b = std::conj(a);
    const cplx c = b;
    const cplx D = beta * (M.a11 + M.a22) - M.a21 - beta * beta * M.a12;
    const cplx Ts = 2.0 * beta * a / (c * D);
    const cplx R = (2.0 * beta * a * (M.a22 - M.a12 * beta) / D - a) / b;
    return assemble(k, Ts, S, R);
}

Detection detection_coefficient(cplx T, cplx R) {
    const double flux = std::norm(T) + std::norm(R);
    if (!(std::abs(flux - 1) <= 1e-8))
        throw std::invalid_argument("amplitudes violate |T|^2 + |R|^2 = 1");
    Detection out;
    out.w = (std::conj(T) * R).real();
    if (std::abs(out.w) >= 1) throw std::invalid_argument("inconsistent amplitudes: |w| >= 1");
    out.A = (T * std::norm(T) - I * R * (std::conj(T) * R).imag()) / (1 - out.w * out.w);
    return out;
}

PhaseSplit phase_split(cplx T, cplx R) {
    if (T == 0.0) throw NumericError("total reflection: transmission phase undefined");
    PhaseSplit ps;
    ps.abs_T = std::abs(T);
    ps.phi = std::arg(T);
    ps.chi = R == 0.0 ? 0.0 : std::arg(I * R * std::conj(T));
    return ps;
}

namespace {

double advance(const std::function<cplx(double)>& f, double ka, double pa, double kb, double raw_b,
               int depth, int max_depth) {
    const double step = std::remainder(raw_b - pa, 2 * std::numbers::pi);
    if (std::abs(step) <= std::numbers::pi / 2) return pa + step;
    if (depth >= max_depth)
        throw NumericError("phase unwrapping failed near k = " + std::to_string(kb) +
                           " (amplitude zero?)");
    const double km = 0.5 * (ka + kb);
    const double pm = advance(f, ka, pa, km, std::arg(f(km)), depth + 1, max_depth);
    return advance(f, km, pm, kb, raw_b, depth + 1, max_depth);
}

} // namespace

std::vector<double> unwrap_phase(const std::function<cplx(double)>& f, const std::vector<double>& ks,
                                 int max_halvings) {
    std::vector<double> out;
    out.reserve(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double raw = std::arg(f(ks[i]));
        if (i == 0) {
            out.push_back(raw);
            continue;
        }
        if (!(ks[i] > ks[i - 1])) throw std::invalid_argument("momentum grid must be increasing");
        out.push_back(advance(f, ks[i - 1], out.back(), ks[i], raw, 0, max_halvings));
    }
    return out;
}

std::vector<double> unwrap_sequence(const std::vector<double>& phases) {
    std::vector<double> out(phases);
    for (std::size_t i = 1; i < out.size(); ++i)
        out[i] = out[i - 1] + std::remainder(phases[i] - out[i - 1], 2 * std::numbers::pi);
    return out;
}

} // namespace tunnelkit
