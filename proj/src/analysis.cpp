#include "tunnelkit/analysis.hpp"

#include "tunnelkit/scattering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tunnelkit {

namespace {

constexpr double kPi = std::numbers::pi;

// arg A on the scaled amplitude so opaque profiles keep their phase
double detection_phase(const PotentialProfile& profile, double k) {
    if (profile.segments.empty()) return 0.0;
    const auto s = piecewise_amplitudes(profile, k);
    if (s.A_scaled == 0.0) throw NumericError("delay undefined at zero of A");
    return std::arg(s.A_scaled);
}

// single-barrier transmission phase -k a + atan(eta tanh(lambda a)), continuous in k
double single_phase(double k, double V0, double a, double m) {
    const auto bf = barrier_functions(k, V0, m);
    return -k * a + std::atan(bf.eta * std::tanh(bf.lambda * a));
}

double reduce_angle(double x) {
    double r = std::remainder(x, 2 * kPi); // [-pi, pi]
    if (r <= -kPi) r += 2 * kPi;
    return r;
}

} // namespace

double phase_delay(double p, const PotentialProfile& profile) {
    if (!(std::isfinite(p) && p > 0)) throw std::invalid_argument("momentum must be positive");
    const double h = 1e-5 * p;
    const std::array<double, 5> ks{p - h, p - 0.5 * h, p, p + 0.5 * h, p + h};
    std::array<double, 5> ph{};
    for (int i = 0; i < 5; ++i) ph[i] = detection_phase(profile, ks[i]);
    for (int i = 1; i < 5; ++i) {
        const double step = std::remainder(ph[i] - ph[i - 1], 2 * kPi);
        if (std::abs(step) > kPi / 2) throw NumericError("delay undefined at zero of A");
        ph[i] = ph[i - 1] + step;
    }
    const double D1 = (ph[4] - ph[0]) / (2 * h);
    const double D2 = (ph[3] - ph[1]) / h;
    const double dphi = (4 * D2 - D1) / 3;
    return dphi / relativistic_kinematics(p, profile.mass).v;
}

double delay_time(double p, const PotentialProfile& profile) {
    if (auto db = as_double_barrier(profile)) return 2 * phase_delay(p, square_barrier(db->V0, db->a, db->m));
    return phase_delay(p, profile);
}

double tunneling_time(double p, const PotentialProfile& profile) {
    return delay_time(p, profile) + profile.extent() / relativistic_kinematics(p, profile.mass).v;
}

namespace {

// G = (d ln e_k / dk) / v
double log_e_rate(double p, double V0, double m, const BarrierFunctions& bf) {
    const double E = std::hypot(p, m);
    const double u = E - V0;
    return E / (p * p) + u / (bf.lambda * bf.lambda) + 1 / (m + u) - 1 / (m + E);
}

} // namespace

double tunneling_time_closed(double p, double V0, double d, double m) {
    if (!(d > 0)) throw std::invalid_argument("barrier width must be positive");
    const auto bf = barrier_functions(p, V0, m);
    const double E = std::hypot(p, m);
    const double G = log_e_rate(p, V0, m, bf);
    const double x = bf.lambda * d;
    const double t = std::tanh(x);
    const double q = std::exp(-2 * x);
    const double sech2 = 4 * q / ((1 + q) * (1 + q));
    const double num = bf.rho * G * t - bf.eta * (E - V0) / bf.lambda * d * sech2;
    return num / (1 + bf.eta * bf.eta * t * t);
}

double tunneling_time_opaque(double p, double V0, double m) {
    const auto bf = barrier_functions(p, V0, m);
    return log_e_rate(p, V0, m, bf) / bf.rho;
}

std::vector<double> find_resonances(double V0, double a, double r, double m, double k_lo, double k_hi,
                                    Warnings* warnings) {
    if (!(a > 0) || !(r >= 0)) throw std::invalid_argument("invalid double-barrier geometry");
    const double kmax = tunneling_momentum_limit(V0, m);
    k_lo = std::max(k_lo, 1e-12 * kmax);
    k_hi = std::min(k_hi, kmax * (1 - 1e-12));
    std::vector<double> roots;
    if (!(k_hi > k_lo)) return roots;

    // Psi = k (r + a) + phi0(k) increases monotonically; resonances sit at Psi = pi/2 + n pi
    auto psi = [&](double k) { return k * (r + a) + single_phase(k, V0, a, m); };
    const double step = kPi / (8 * (r + a));
    const std::size_t n = std::max<std::size_t>(1, std::size_t(std::ceil((k_hi - k_lo) / step)));
    double ka = k_lo, pa = psi(ka);
    for (std::size_t i = 1; i <= n; ++i) {
        const double kb = i == n ? k_hi : k_lo + (k_hi - k_lo) * double(i) / double(n);
        const double pb = psi(kb);
        for (double j = std::ceil((pa - kPi / 2) / kPi); kPi / 2 + j * kPi <= pb; j += 1) {
            const double target = kPi / 2 + j * kPi;
            if (target <= pa) continue;
            double lo = ka, hi = kb;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                (psi(mid) < target ? lo : hi) = mid;
            }
            const double k = 0.5 * (lo + hi);
            double absT = 0;
            try {
                absT = double_barrier_T(k, V0, a, r, m).abs_T;
            } catch (const NumericError&) {
                // amplitude extraction lost precision; treated as unverified
            }
            if (absT > 1 - 1e-6) {
                roots.push_back(k);
            } else {
                std::ostringstream msg;
                msg << "resonance candidate k = " << k << " dropped: |T| = " << absT;
                warn(warnings, msg.str());
            }
        }
        ka = kb;
        pa = pb;
    }
    return roots;
}

double decay_rate(double p, const DoubleBarrier& db, Warnings* warnings) {
    const auto s = square_barrier_amplitudes(p, db.V0, db.a, db.m);
    const double T0sq = s.abs_T * s.abs_T;
    if (T0sq > 0.1) {
        std::ostringstream msg;
        msg << "|T0|^2 = " << T0sq << " > 0.1: single barriers are not opaque, decay-rate formula unreliable";
        warn(warnings, msg.str());
    }
    const double v = relativistic_kinematics(p, db.m).v;
    return T0sq / (db.r / v + tunneling_time_closed(p, db.V0, db.a, db.m));
}

DoubleBarrierObservables double_barrier_observables(const WavePacketSpec& spec, double L, const DoubleBarrier& db,
                                                    Warnings* warnings) {
    DoubleBarrierObservables o;
    const double p = spec.p;
    o.v = relativistic_kinematics(p, db.m).v;
    o.tau = tunneling_time_closed(p, db.V0, db.a, db.m);
    o.phi0 = single_phase(p, db.V0, db.a, db.m);
    o.phi0_prime = -db.a + o.v * o.tau;
    const auto s = square_barrier_amplitudes(p, db.V0, db.a, db.m);
    o.abs_T0_sq = s.abs_T * s.abs_T;
    o.t0 = (L + spec.x0 + 2 * o.phi0_prime) / o.v;
    o.dt = 2 * (db.r / o.v + o.tau);
    o.gamma = decay_rate(p, db, warnings);
    o.beta = reduce_angle(2 * p * (db.r + db.a) + 2 * o.phi0 + kPi);
    o.mu = o.beta / (2 * spec.sigma * o.v * o.dt);
    return o;
}

RegimeReport regime_report(const WavePacketSpec& spec, double L, const DoubleBarrier& db, Warnings* warnings) {
    const auto o = double_barrier_observables(spec, L, db, warnings);
    RegimeReport r;
    r.p = spec.p;
    r.v = o.v;
    r.t_d = 2 * o.phi0_prime / o.v;
    r.tau = o.tau;
    r.t0 = o.t0;
    r.dt = o.dt;
    r.gamma = o.gamma;
    r.beta = o.beta;
    r.mu = o.mu;
    r.abs_T0_sq = o.abs_T0_sq;
    r.sigma_v_dt = spec.sigma * o.v * o.dt;
    r.abs_Tp_sq_pointwise = std::pow(double_barrier_T(spec.p, db.V0, db.a, db.r, db.m).abs_T, 2);
    r.abs_Tp_sq = total_transmission(spec, db.profile());
    const auto [ka, kb] = spec.window();
    r.resonances = find_resonances(db.V0, db.a, db.r, db.m, ka, kb, warnings);
    return r;
}

double envelope_density(double t, const RegimeReport& report) {
    if (t < report.t0) return 0.0;
    return report.abs_Tp_sq * report.gamma * std::exp(-report.gamma * (t - report.t0));
}

namespace {

ExponentialFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    ExponentialFit f;
    const std::size_t n = x.size();
    f.samples = n;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) throw std::invalid_argument("fit window has no time extent");
    const double slope = sxy / sxx;
    f.rate = -slope;
    f.intercept = my - slope * mx;
    // relative tolerance: log data that is flat up to rounding counts as constant
    if (syy <= 1e-24 * std::max(1.0, my * my) * double(n)) {
        f.rate = 0;
        f.intercept = my;
        f.r2 = 0;
        f.degenerate = true;
        f.poor = true;
        return f;
    }
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + slope * x[i]);
        ss_res += e * e;
    }
    f.r2 = 1 - ss_res / syy;
    f.poor = f.r2 < 0.9;
    return f;
}

} // namespace

ExponentialFit fit_exponential(const ArrivalDistribution& dist, const FitWindow& window, FitMode mode) {
    if (dist.t.size() != dist.P.size()) throw std::invalid_argument("distribution columns differ in length");
    std::vector<double> x, y;
    if (mode == FitMode::raw) {
        double peak = 0;
        for (double v : dist.P) peak = std::max(peak, v);
        for (std::size_t i = 0; i < dist.t.size(); ++i) {
            const double t = dist.t[i];
            if (t < window.t_lo || t > window.t_hi) continue;
            if (!(dist.P[i] > 0)) throw std::invalid_argument("non-positive density inside the fit window");
            if (dist.P[i] > 1e-12 * peak) {
                x.push_back(t);
                y.push_back(std::log(dist.P[i]));
            }
        }
        if (x.size() < 10) throw std::invalid_argument("fit window holds fewer than 10 usable samples");
    } else {
        for (const auto& pk : detect_peaks(dist)) {
            if (pk.t < window.t_lo || pk.t > window.t_hi) continue;
            x.push_back(pk.t);
            y.push_back(std::log(pk.height));
        }
        if (x.size() < 3) throw std::invalid_argument("fit window holds fewer than 3 peaks");
    }
    return linear_fit(x, y);
}

std::vector<Peak> detect_peaks(const ArrivalDistribution& dist) {
    std::vector<Peak> out;
    const auto& P = dist.P;
    if (P.size() < 3) return out;
    double top = 0;
    for (double v : P) top = std::max(top, v);
    if (!(top > 0)) return out;
    const double floor = 1e-6 * top;
    for (std::size_t i = 1; i + 1 < P.size(); ++i) {
        if (!(P[i] > P[i - 1] && P[i] >= P[i + 1] && P[i] > floor)) continue;
        const double y0 = P[i - 1], y1 = P[i], y2 = P[i + 1];
        const double den = y0 - 2 * y1 + y2;
        double off = den != 0 ? 0.5 * (y0 - y2) / den : 0.0;
        off = std::clamp(off, -0.5, 0.5);
        const double h = dist.t[i + 1] - dist.t[i];
        out.push_back({dist.t[i] + off * h, y1 - 0.25 * (y0 - y2) * off});
    }
    return out;
}

double causality_mass(const ArrivalDistribution& dist, double L, double x0, double slack) {
    const double cut = L + x0 - slack;
    double total = 0, early = 0;
    for (std::size_t i = 1; i < dist.t.size(); ++i) {
        const double a = dist.t[i - 1], b = dist.t[i];
        const double pa = dist.P[i - 1], pb = dist.P[i];
        const double seg = 0.5 * (pa + pb) * (b - a);
        total += seg;
        if (b <= cut) {
            early += seg;
        } else if (a < cut) {
            const double pc = pa + (pb - pa) * (cut - a) / (b - a);
            early += 0.5 * (pa + pc) * (cut - a);
        }
    }
    return total > 0 ? early / total : 0.0;
}

nlohmann::json to_json(const RegimeReport& r) {
    nlohmann::json j{{"units", "times in 1/m, rates in m, momenta in m"},
                     {"p", r.p},
                     {"v", r.v},
                     {"t_d", r.t_d},
                     {"tau", r.tau},
                     {"t0", r.t0},
                     {"dt", r.dt},
                     {"gamma", r.gamma},
                     {"beta", r.beta},
                     {"mu", r.mu},
                     {"abs_T0_sq", r.abs_T0_sq},
                     {"abs_Tp_sq", r.abs_Tp_sq},
                     {"abs_Tp_sq_pointwise", r.abs_Tp_sq_pointwise},
                     {"sigma_v_dt", r.sigma_v_dt},
                     {"resonances", r.resonances}};
    if (r.has_fit)
        j["fit"] = {{"rate", r.fit_rate}, {"r2", r.fit_r2}, {"window", {r.fit_t_lo, r.fit_t_hi}}};
    return j;
}

nlohmann::json to_json(const ExponentialFit& f) {
    return {{"rate", f.rate}, {"intercept", f.intercept}, {"r2", f.r2},
            {"samples", f.samples}, {"poor", f.poor}, {"degenerate", f.degenerate}};
}

} // namespace tunnelkit
