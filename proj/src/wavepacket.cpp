#include "tunnelkit/wavepacket.hpp"

#include "tunnelkit/analysis.hpp"
#include "tunnelkit/chebyshev.hpp"
#include "tunnelkit/quadrature.hpp"
#include "tunnelkit/scattering.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

namespace tunnelkit {

namespace {
constexpr double kTwoPi = 2 * std::numbers::pi;
}

std::string to_string(PacketShape s) {
    return s == PacketShape::gaussian ? "gaussian" : "lorentzian";
}

double WavePacketSpec::sigma_x() const {
    // Lorentzian |u0|^2 ~ exp(-2 sigma |x|) has standard deviation 1/(sqrt(2) sigma)
    return shape == PacketShape::gaussian ? 0.5 / sigma : 1.0 / (std::numbers::sqrt2 * sigma);
}

std::pair<double, double> WavePacketSpec::window() const {
    const double n = shape == PacketShape::gaussian ? 8.0 : 80.0;
    return {std::max(p - n * sigma, 1e-9 * p), p + n * sigma};
}

void WavePacketSpec::validate() const {
    if (!(std::isfinite(p) && p > 0)) throw ConfigError("p", "mean momentum must be positive");
    if (!(std::isfinite(sigma) && sigma > 0)) throw ConfigError("sigma", "momentum spread must be positive");
    if (!(sigma < p / 3)) throw ConfigError("sigma", "momentum spread must stay below p/3");
    if (!(std::isfinite(x0) && x0 > 0)) throw ConfigError("x0", "emission distance must be positive");
}

double packet_envelope(const WavePacketSpec& spec, double q) {
    if (!std::isfinite(q)) throw std::invalid_argument("momentum must be finite");
    const double s = spec.sigma;
    if (spec.shape == PacketShape::gaussian)
        return std::pow(kTwoPi / (s * s), 0.25) * std::exp(-q * q / (4 * s * s));
    // integral of (1+x^2)^-2 over the line is pi/2, hence the factor 2
    return 2.0 / std::sqrt(s) / (1 + (q / s) * (q / s));
}

cplx packet_momentum_amplitude(const WavePacketSpec& spec, double k) {
    return packet_envelope(spec, k - spec.p) * std::polar(1.0, k * spec.x0);
}

double packet_position_envelope(const WavePacketSpec& spec, double x) {
    const double s = spec.sigma;
    if (spec.shape == PacketShape::gaussian) return std::pow(2 * s * s / std::numbers::pi, 0.25) * std::exp(-s * s * x * x);
    return std::sqrt(s) * std::exp(-s * std::abs(x));
}

Absorption::Absorption(double value) : c_(value) {
    if (!(std::isfinite(value) && value >= 0)) throw ConfigError("", "absorption must be non-negative");
}

Absorption::Absorption(std::vector<double> k, std::vector<double> alpha) : ks_(std::move(k)), ys_(std::move(alpha)) {
    if (ks_.size() != ys_.size()) throw ConfigError("", "absorption table columns differ in length");
    if (ks_.size() < 2) throw ConfigError("", "absorption table needs at least two samples");
    for (std::size_t i = 0; i < ks_.size(); ++i) {
        if (!(std::isfinite(ys_[i]) && ys_[i] >= 0))
            throw ConfigError("alpha[" + std::to_string(i) + "]", "absorption must be non-negative");
        if (i && !(ks_[i] > ks_[i - 1]))
            throw ConfigError("k[" + std::to_string(i) + "]", "momenta must increase");
    }
    // Fritsch-Carlson slopes
    const std::size_t n = ks_.size();
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (ys_[i + 1] - ys_[i]) / (ks_[i + 1] - ks_[i]);
    slopes_.assign(n, 0.0);
    slopes_[0] = delta[0];
    slopes_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
        slopes_[i] = delta[i - 1] * delta[i] <= 0 ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (delta[i] == 0) {
            slopes_[i] = slopes_[i + 1] = 0;
            continue;
        }
        const double a = slopes_[i] / delta[i], b = slopes_[i + 1] / delta[i];
        const double h = a * a + b * b;
        if (h > 9) {
            const double t = 3 / std::sqrt(h);
            slopes_[i] = t * a * delta[i];
            slopes_[i + 1] = t * b * delta[i];
        }
    }
}

double Absorption::operator()(double k) const {
    if (ks_.empty()) return c_;
    if (k <= ks_.front()) return ys_.front();
    if (k >= ks_.back()) return ys_.back();
    const auto it = std::upper_bound(ks_.begin(), ks_.end(), k);
    const std::size_t i = std::size_t(it - ks_.begin()) - 1;
    const double h = ks_[i + 1] - ks_[i];
    const double s = (k - ks_[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * ys_[i] + h10 * h * slopes_[i] + h01 * ys_[i + 1] + h11 * h * slopes_[i + 1];
}

void validate_detector(const DetectorSpec& det, double d, Warnings* warnings) {
    if (!(std::isfinite(det.L) && det.L > 0.5 * d)) throw ConfigError("L", "detector must sit beyond the barrier");
    if (d > 0 && det.L < 10 * d) throw ConfigError("L", "detector closer than 10 barrier lengths");
    if (d > 0 && det.L < 50 * d)
        warn(warnings, "detector at L = " + std::to_string(det.L) + " is closer than 50 barrier lengths (" +
                           std::to_string(50 * d) + "); far-detector formula may be inaccurate");
}

std::vector<double> TimeGrid::points() const {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = at(i);
    return out;
}

void TimeGrid::validate() const {
    if (n < 1) throw ConfigError("n", "time grid needs at least one point");
    if (!std::isfinite(t_start)) throw ConfigError("t_start", "must be finite");
    if (!std::isfinite(t_end)) throw ConfigError("t_end", "must be finite");
    if (n > 1 && !(t_end > t_start)) throw ConfigError("t_end", "must exceed t_start");
}

double ArrivalDistribution::mass() const {
    double s = 0;
    for (std::size_t i = 1; i < P.size(); ++i) s += 0.5 * (P[i] + P[i - 1]) * (t[i] - t[i - 1]);
    return s;
}

AmplitudeModel profile_model(const PotentialProfile& profile) {
    return profile_model(profile, 0, std::numeric_limits<double>::infinity());
}

AmplitudeModel profile_model(const PotentialProfile& profile, double k_lo, double k_hi) {
    AmplitudeModel m;
    m.mass = profile.mass;
    m.extent = profile.extent();
    m.label = "transfer-matrix";
    if (profile.segments.empty()) {
        m.A = [](double) { return cplx(1, 0); };
        m.label = "free";
        return m;
    }
    m.A = [profile](double k) { return piecewise_amplitudes(profile, k).A; };
    if (auto db = as_double_barrier(profile)) {
        const double kmax = tunneling_momentum_limit(db->V0, db->m);
        m.hints = find_resonances(db->V0, db->a, db->r, db->m, std::max(k_lo, 1e-6 * kmax),
                                  std::min(k_hi, (1 - 1e-9) * kmax));
    }
    return m;
}

namespace {

struct Stats {
    std::size_t evaluations = 0;
    std::size_t refined = 0;
    double worst = 0;
    bool failed = false;
    double fail_lo = 0, fail_hi = 0, fail_err = 0;
};

// Shared, read-only after construction: t-independent integrand on cached GK15 nodes.
AmplitudeTable::Options table_options(const AmplitudeModel& model) {
    AmplitudeTable::Options o;
    o.abs_tol = model.noise_floor;
    return o;
}

AmplitudeModel windowed_model(const WavePacketSpec& spec, const PotentialProfile& profile) {
    const auto [ka, kb] = spec.window();
    return profile_model(profile, ka, kb);
}

class ArrivalEngine {
public:
    ArrivalEngine(const WavePacketSpec& spec, const AmplitudeModel& model, const DetectorSpec& det,
                  const std::vector<double>& times, const ArrivalOptions& opt, QuadratureDiagnostics& diag)
        : spec_(spec), X_(det.L + spec.x0), opt_(opt) {
        const auto [ka, kb] = spec.window();
        m_ = model.mass;
        Ep_ = std::hypot(spec.p, m_);
        if (model.label == "free") {
            A_ = model.A;
        } else {
            table_ = std::make_shared<AmplitudeTable>(model.A, ka, kb, model.hints, table_options(model));
            diag.table_panels = table_->panels();
            diag.table_evaluations = table_->evaluations();
            diag.table_max_error = table_->max_error();
            auto tab = table_;
            A_ = [tab](double k) { return (*tab)(k); };
        }
        alpha_ = det.alpha;

        // largest |X - v_k t| over the window and time grid bounds the phase rate
        double tmin = times.front(), tmax = times.front();
        for (double t : times) {
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
        }
        const double va = ka / std::hypot(ka, m_), vb = kb / std::hypot(kb, m_);
        double rate = 0;
        for (double v : {va, vb})
            for (double t : {tmin, tmax}) rate = std::max(rate, std::abs(X_ - v * t));
        const double hmax = rate > 0 ? (std::numbers::pi / 4) / rate : (kb - ka);

        std::vector<double> coarse = table_ ? table_->breakpoints() : std::vector<double>{ka, kb};
        std::vector<double> breaks;
        const double hmin_panels = (kb - ka) / 32;
        for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
            const double a = coarse[i], b = coarse[i + 1];
            const double h = std::min(hmax, hmin_panels);
            const std::size_t n = std::max<std::size_t>(1, std::size_t(std::ceil((b - a) / h)));
            for (std::size_t j = 0; j < n; ++j) breaks.push_back(a + (b - a) * double(j) / double(n));
        }
        breaks.push_back(kb);
        width_ = kb - ka;

        const std::size_t np = breaks.size() - 1;
        nodes_.resize(np);
        l1_ = 0;
        for (std::size_t i = 0; i < np; ++i) {
            auto& nd = nodes_[i];
            nd.a = breaks[i];
            nd.b = breaks[i + 1];
            nd.k = GaussKronrod15::nodes(nd.a, nd.b);
            nd.wk = GaussKronrod15::kronrod_weights(nd.a, nd.b);
            nd.wg = GaussKronrod15::gauss_weights(nd.a, nd.b);
            for (int j = 0; j < 15; ++j) {
                nd.g[j] = integrand(nd.k[j]);
                nd.dk[j] = nd.k[j] - spec.p;
                nd.dE[j] = dE(nd.k[j]);
                l1_ += nd.wk[j] * std::abs(nd.g[j]);
            }
        }
        diag.base_panels = np;
        diag.integrand_l1 = l1_;
    }

    cplx amplitude(double t, Stats& st) const {
        const double budget = opt_.rel_tol * l1_ / width_; // allowed error per unit momentum
        cplx total = 0;
        double err_total = 0;
        for (const auto& nd : nodes_) {
            cplx K = 0, G = 0;
            for (int j = 0; j < 15; ++j) {
                const cplx y = nd.g[j] * std::polar(1.0, nd.dk[j] * X_ - nd.dE[j] * t);
                K += nd.wk[j] * y;
                G += nd.wg[j] * y;
            }
            st.evaluations += 15;
            const double err = std::abs(K - G);
            if (err <= budget * (nd.b - nd.a)) {
                total += K;
                err_total += err;
            } else {
                double e = 0;
                total += refine(nd.a, nd.b, t, budget, 1, st, e);
                err_total += e;
            }
        }
        if (l1_ > 0) st.worst = std::max(st.worst, err_total / l1_);
        return total * std::polar(1.0, spec_.p * X_ - Ep_ * t);
    }

private:
    struct Nodes {
        double a, b;
        std::array<double, 15> k, wk, wg, dk, dE;
        std::array<cplx, 15> g;
    };

    double dE(double k) const {
        const double dk = k - spec_.p;
        return dk * (k + spec_.p) / (std::hypot(k, m_) + Ep_);
    }

    cplx integrand(double k) const {
        const double v = k / std::hypot(k, m_);
        const double al = alpha_(k);
        if (al == 0) return 0.0;
        return std::sqrt(al * v) * A_(k) * packet_envelope(spec_, k - spec_.p) / (2 * std::numbers::pi);
    }

    cplx refine(double a, double b, double t, double budget, int depth, Stats& st, double& err_out) const {
        const double mid = 0.5 * (a + b);
        cplx sum = 0;
        for (auto [lo, hi] : {std::pair{a, mid}, std::pair{mid, b}}) {
            const auto ks = GaussKronrod15::nodes(lo, hi);
            const auto wk = GaussKronrod15::kronrod_weights(lo, hi);
            const auto wg = GaussKronrod15::gauss_weights(lo, hi);
            cplx K = 0, G = 0;
            for (int j = 0; j < 15; ++j) {
                const double dk = ks[j] - spec_.p;
                const cplx y = integrand(ks[j]) * std::polar(1.0, dk * X_ - dE(ks[j]) * t);
                K += wk[j] * y;
                G += wg[j] * y;
            }
            st.evaluations += 15;
            ++st.refined;
            const double err = std::abs(K - G);
            if (err <= budget * (hi - lo)) {
                sum += K;
                err_out += err;
            } else if (depth >= opt_.max_depth) {
                if (!st.failed || err > st.fail_err) {
                    st.failed = true;
                    st.fail_lo = lo;
                    st.fail_hi = hi;
                    st.fail_err = err;
                }
                sum += K;
                err_out += err;
            } else {
                sum += refine(lo, hi, t, budget, depth + 1, st, err_out);
            }
        }
        return sum;
    }

    WavePacketSpec spec_;
    double X_ = 0, m_ = 1, Ep_ = 1, width_ = 1, l1_ = 0;
    ArrivalOptions opt_;
    std::shared_ptr<AmplitudeTable> table_;
    std::function<cplx(double)> A_;
    Absorption alpha_;
    std::vector<Nodes> nodes_;
};

unsigned thread_count(unsigned requested, std::size_t work) {
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return unsigned(std::min<std::size_t>(n, std::max<std::size_t>(1, work)));
}

ArrivalDistribution run_engine(const TimeGrid& grid, const WavePacketSpec& spec, const AmplitudeModel& model,
                               const DetectorSpec& det, const ArrivalOptions& opt) {
    grid.validate();
    spec.validate();
    validate_detector(det, model.extent, opt.warnings);
    if (spec.x0 < 0.5 * model.extent + 5 * spec.sigma_x())
        warn(opt.warnings, "initial packet overlaps the barrier (x0 < d/2 + 5 sigma_x)");

    ArrivalDistribution out;
    out.grid = grid;
    out.t = grid.points();
    out.P.assign(grid.n, 0.0);
    out.amplitude.assign(grid.n, 0.0);
    ArrivalEngine engine(spec, model, det, out.t, opt, out.diagnostics);

    const unsigned nt = thread_count(opt.threads, grid.n);
    std::vector<Stats> stats(nt);
    auto work = [&](unsigned id) {
        for (std::size_t i = id; i < grid.n; i += nt) out.amplitude[i] = engine.amplitude(out.t[i], stats[id]);
    };
    if (nt == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned id = 0; id < nt; ++id) pool.emplace_back(work, id);
        for (auto& th : pool) th.join();
    }
    const Stats* failed = nullptr;
    for (const auto& s : stats) {
        out.diagnostics.integrand_evaluations += s.evaluations;
        out.diagnostics.refined_panels += s.refined;
        out.diagnostics.worst_relative_error = std::max(out.diagnostics.worst_relative_error, s.worst);
        if (s.failed && (!failed || s.fail_err > failed->fail_err)) failed = &s;
    }
    if (failed) {
        std::ostringstream msg;
        msg << "arrival quadrature did not converge; worst panel [" << failed->fail_lo << ", " << failed->fail_hi
            << "] error estimate " << failed->fail_err;
        throw NumericError(msg.str());
    }
    for (std::size_t i = 0; i < grid.n; ++i) out.P[i] = std::norm(out.amplitude[i]);

    out.metadata["packet"] = to_json(spec);
    out.metadata["detector"] = to_json(det);
    out.metadata["amplitude_model"] = model.label;
    out.metadata["quadrature"] = to_json(out.diagnostics);
    out.metadata["mass"] = out.mass();
    return out;
}

} // namespace

cplx arrival_amplitude(double L, double t, const WavePacketSpec& spec, const PotentialProfile& profile,
                       const Absorption& alpha) {
    ArrivalOptions opt;
    opt.threads = 1;
    const auto d = run_engine(TimeGrid{t, t, 1}, spec, windowed_model(spec, profile), DetectorSpec{L, alpha}, opt);
    return d.amplitude[0];
}

ArrivalDistribution arrival_density(const TimeGrid& grid, const WavePacketSpec& spec,
                                    const PotentialProfile& profile, const DetectorSpec& detector,
                                    const ArrivalOptions& opt) {
    profile.validate();
    auto out = run_engine(grid, spec, windowed_model(spec, profile), detector, opt);
    out.metadata["profile"] = to_json(profile);
    return out;
}

ArrivalDistribution arrival_density(const TimeGrid& grid, const WavePacketSpec& spec, const AmplitudeModel& model,
                                    const DetectorSpec& detector, const ArrivalOptions& opt) {
    return run_engine(grid, spec, model, detector, opt);
}

double total_transmission(const WavePacketSpec& spec, const AmplitudeModel& model, const Absorption& alpha) {
    spec.validate();
    const auto [ka, kb] = spec.window();
    std::vector<double> breaks{ka, kb};
    std::function<cplx(double)> A = model.A;
    std::shared_ptr<AmplitudeTable> table;
    if (model.label != "free") {
        table = std::make_shared<AmplitudeTable>(model.A, ka, kb, model.hints, table_options(model));
        breaks = table->breakpoints();
        A = [table](double k) { return (*table)(k); };
    }
    auto f = [&](double k) {
        const double u = packet_envelope(spec, k - spec.p);
        return cplx(alpha(k) * std::norm(A(k)) * u * u / (2 * std::numbers::pi), 0);
    };
    QuadratureOptions qo;
    qo.rel_tol = 1e-11;
    return integrate(f, breaks, qo).value.real();
}

double total_transmission(const WavePacketSpec& spec, const PotentialProfile& profile, const Absorption& alpha) {
    profile.validate();
    return total_transmission(spec, windowed_model(spec, profile), alpha);
}

nlohmann::json to_json(const WavePacketSpec& spec) {
    return {{"shape", to_string(spec.shape)}, {"p", spec.p}, {"sigma", spec.sigma}, {"x0", spec.x0}};
}

nlohmann::json to_json(const PotentialProfile& profile) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : profile.segments) segs.push_back({{"v", s.v}, {"w", s.w}});
    return {{"mass", profile.mass}, {"segments", segs}};
}

nlohmann::json to_json(const DetectorSpec& det) {
    nlohmann::json j{{"L", det.L}};
    if (det.alpha.is_constant())
        j["alpha"] = det.alpha.constant();
    else
        j["alpha"] = {{"k", det.alpha.ks()}, {"alpha", det.alpha.values()}};
    return j;
}

nlohmann::json to_json(const QuadratureDiagnostics& d) {
    return {{"table_panels", d.table_panels},
            {"table_evaluations", d.table_evaluations},
            {"table_max_error", d.table_max_error},
            {"base_panels", d.base_panels},
            {"integrand_evaluations", d.integrand_evaluations},
            {"refined_panels", d.refined_panels},
            {"worst_relative_error", d.worst_relative_error},
            {"integrand_l1", d.integrand_l1}};
}

} // namespace tunnelkit
