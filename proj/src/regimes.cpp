#include "tunnelkit/analysis.hpp"

#include "tunnelkit/scattering.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tunnelkit {

namespace {

constexpr double kPi = std::numbers::pi;

ArrivalDistribution blank(const TimeGrid& grid, const char* label) {
    grid.validate();
    ArrivalDistribution out;
    out.grid = grid;
    out.t = grid.points();
    out.P.assign(grid.n, 0.0);
    out.metadata["regime"] = label;
    return out;
}

void finish(ArrivalDistribution& out, const WavePacketSpec& spec, double L, const DoubleBarrier& db,
            const DoubleBarrierObservables& o) {
    out.metadata["packet"] = to_json(spec);
    out.metadata["profile"] = to_json(db.profile());
    out.metadata["L"] = L;
    out.metadata["t0"] = o.t0;
    out.metadata["dt"] = o.dt;
    out.metadata["gamma"] = o.gamma;
    out.metadata["beta"] = o.beta;
    out.metadata["mu"] = o.mu;
    out.metadata["mass"] = out.mass();
}

} // namespace

ArrivalDistribution peak_series_density(const TimeGrid& grid, const WavePacketSpec& spec, double L,
                                        const DoubleBarrier& db, int n_max, Warnings* warnings) {
    spec.validate();
    auto out = blank(grid, "peak-series");
    const auto o = double_barrier_observables(spec, L, db, warnings);
    const double R0sq = 1 - o.abs_T0_sq;
    if (spec.sigma_x() >= o.v * o.dt / 4) {
        std::ostringstream msg;
        msg << "peak series: sigma_x = " << spec.sigma_x() << " is not small against v dt / 4 = " << o.v * o.dt / 4
            << "; peaks overlap";
        warn(warnings, msg.str());
    }
    if (n_max <= 0) n_max = R0sq > 0 ? int(std::ceil(std::log(1e-8) / std::log(R0sq))) : 1;
    const double span = o.v * o.dt;
    // amplitudes |R0|^(2n) e^(i n beta), kept as a recurrence-free table
    std::vector<cplx> weight(n_max + 1);
    for (int n = 0; n <= n_max; ++n) weight[n] = std::polar(std::pow(R0sq, n), n * o.beta);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double s = (out.t[i] - o.t0) / o.dt;
        cplx sum = 0;
        for (int n = 0; n <= n_max; ++n) sum += weight[n] * packet_position_envelope(spec, span * (n - s));
        out.P[i] = o.v * o.abs_T0_sq * o.abs_T0_sq * std::norm(sum);
    }
    out.metadata["n_max"] = n_max;
    finish(out, spec, L, db, o);
    return out;
}

ArrivalDistribution continuum_density(const TimeGrid& grid, const WavePacketSpec& spec, double L,
                                      const DoubleBarrier& db, Warnings* warnings) {
    spec.validate();
    if (spec.shape != PacketShape::gaussian) throw std::invalid_argument("continuum regime needs a Gaussian packet");
    auto out = blank(grid, "continuum");
    const auto o = double_barrier_observables(spec, L, db, warnings);
    const double a = spec.sigma * o.v * o.dt;
    if (a > 3) {
        std::ostringstream msg;
        msg << "continuum regime: sigma v dt = " << a << " > 3, peaks are resolved";
        warn(warnings, msg.str());
    }
    // Sum over round trips n of exp(-c n) u0(v dt (n - s)) by Euler-Maclaurin:
    // integral over n >= 0 plus half the n = 0 term, with c = |T0|^2 - i beta.
    const double N = std::pow(2 * spec.sigma * spec.sigma / kPi, 0.25);
    const cplx c(o.abs_T0_sq, -o.beta);
    const double pref = std::sqrt(kPi) / (2 * a);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double s = (out.t[i] - o.t0) / o.dt;
        const cplx Z = -a * s + c / (2 * a);
        const double g = std::exp(-a * a * s * s);
        cplx integral;
        // exp(-c s + c^2/4a^2) erfc(Z) = exp(-a^2 s^2) erfcx(Z)
        if (Z.real() >= 0)
            integral = pref * g * erfcx_complex(Z);
        else
            integral = pref * (2.0 * std::exp(-c * s + c * c / (4 * a * a)) - g * erfcx_complex(-Z));
        const cplx amp = N * (integral + 0.5 * g);
        out.P[i] = o.v * o.abs_T0_sq * o.abs_T0_sq * std::norm(amp);
    }
    finish(out, spec, L, db, o);
    out.metadata["sigma_v_dt"] = a;
    return out;
}

Resonance resonance_at(double k0, const DoubleBarrier& db, Warnings* warnings) {
    return {k0, decay_rate(k0, db, warnings)};
}

namespace {

// Contour integral of the Lorentzian packet against one Lorentzian line,
// in units where P = v |I|^2. kappa = 2 v_k0 / Gamma, delta = k0 - p.
cplx line_amplitude(double tau, double sigma, double v, double kappa, double delta) {
    const double C = 2.0;
    const cplx i(0, 1);
    if (tau < 0)
        return 0.5 * C * std::sqrt(sigma) * std::exp(sigma * v * tau) / (1 + kappa * sigma + i * kappa * delta);
    const cplx pole = delta - i / kappa;
    return 0.5 * C * std::sqrt(sigma) * std::exp(-sigma * v * tau) / (1 - kappa * sigma + i * kappa * delta) +
           C * std::pow(sigma, 1.5) / kappa * std::exp(-i * delta * v * tau - v * tau / kappa) /
               (pole * pole + sigma * sigma);
}

// delta = 0; the two terms share a removable singularity at kappa sigma = 1
double exact_line_amplitude(double tau, double sigma, double v, double kappa) {
    const double ks = kappa * sigma;
    if (tau < 0) return std::sqrt(sigma) * std::exp(sigma * v * tau) / (1 + ks);
    if (std::abs(1 - ks) < 1e-6) {
        const double h = 1e-5 * kappa;
        return 0.5 * (exact_line_amplitude(tau, sigma, v, kappa + h) + exact_line_amplitude(tau, sigma, v, kappa - h));
    }
    return std::sqrt(sigma) / (1 - ks) *
           (std::exp(-sigma * v * tau) - 2 * ks / (1 + ks) * std::exp(-v * tau / kappa));
}

ArrivalDistribution lines_density(const TimeGrid& grid, const WavePacketSpec& spec, double L,
                                  const DoubleBarrier& db, const std::vector<Resonance>& res, bool exact,
                                  Warnings* warnings, const char* label) {
    spec.validate();
    if (spec.shape != PacketShape::lorentzian)
        throw std::invalid_argument("resonance regime needs a Lorentzian packet");
    if (res.empty()) throw std::invalid_argument("no resonances supplied");
    auto out = blank(grid, label);
    const auto o = double_barrier_observables(spec, L, db, warnings);
    const double vp = o.v;
    std::vector<double> kappa;
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& r : res) {
        if (!(r.gamma > 0)) throw std::invalid_argument("resonance width must be positive");
        const double vk = relativistic_kinematics(r.k, db.m).v;
        kappa.push_back(2 * vk / r.gamma);
        const double delta = r.k - spec.p;
        if (std::abs(delta) > spec.sigma) {
            std::ostringstream msg;
            msg << "resonance at k = " << r.k << " lies outside the packet peak (|k - p| > sigma)";
            warn(warnings, msg.str());
        }
        if (exact && (std::abs(delta) > 0.1 * spec.sigma || r.gamma >= 2 * spec.sigma * vp)) {
            std::ostringstream msg;
            msg << "exact-resonance form used with |k0 - p| = " << std::abs(delta) << ", Gamma = " << r.gamma
                << ", 2 sigma v = " << 2 * spec.sigma * vp << "; pure exponential decay needs k0 = p and Gamma < 2 sigma v";
            warn(warnings, msg.str());
        }
        lines.push_back({{"k", r.k}, {"gamma", r.gamma}});
    }
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double tau = out.t[i] - o.t0;
        cplx I = 0;
        for (std::size_t j = 0; j < res.size(); ++j) {
            if (exact)
                I += exact_line_amplitude(tau, spec.sigma, vp, kappa[j]);
            else
                I += line_amplitude(tau, spec.sigma, vp, kappa[j], res[j].k - spec.p);
        }
        out.P[i] = vp * std::norm(I);
    }
    finish(out, spec, L, db, o);
    out.metadata["lines"] = lines;
    return out;
}

} // namespace

ArrivalDistribution resonance_density(const TimeGrid& grid, const WavePacketSpec& spec, double L,
                                      const DoubleBarrier& db, const Resonance& res, bool exact,
                                      Warnings* warnings) {
    return lines_density(grid, spec, L, db, {res}, exact, warnings, exact ? "resonance-exact" : "resonance");
}

ArrivalDistribution multi_resonance_density(const TimeGrid& grid, const WavePacketSpec& spec, double L,
                                            const DoubleBarrier& db, const std::vector<Resonance>& res,
                                            Warnings* warnings) {
    if (res.size() < 2) warn(warnings, "multi-resonance density called with fewer than two resonances");
    return lines_density(grid, spec, L, db, res, false, warnings, "multi-resonance");
}

AmplitudeModel lorentzian_model(const DoubleBarrier& db, const std::vector<Resonance>& res) {
    AmplitudeModel m;
    m.mass = db.m;
    m.extent = 2 * db.a + db.r;
    m.label = "lorentzian";
    for (const auto& r : res) m.hints.push_back(r.k);
    m.A = [db, res](double k) {
        const double kmax = tunneling_momentum_limit(db.V0, db.m);
        const double kk = std::min(k, kmax * (1 - 1e-12));
        const auto bf = barrier_functions(kk, db.V0, db.m);
        const double phi0 = -kk * db.a + std::atan(bf.eta * std::tanh(bf.lambda * db.a));
        cplx sum = 0;
        for (const auto& r : res) {
            const double kappa = 2 * relativistic_kinematics(r.k, db.m).v / r.gamma;
            sum += 1.0 / cplx(1, -kappa * (k - r.k));
        }
        return std::polar(1.0, 2 * phi0) * sum;
    };
    return m;
}

} // namespace tunnelkit
