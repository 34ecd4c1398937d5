// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed below.

#include "prop.hpp"
#include "regime_configs.hpp"

#include "tunnelkit/io.hpp"
#include "tunnelkit/scenario.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>

using namespace tunnelkit;
using regimes::Setup;
using C = std::complex<double>;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

// tolerances
constexpr double kUnitarityTol = 1e-10;
constexpr double kOracleTol = 1e-9;
constexpr double kCompositionTol = 1e-10;
constexpr double kMergeTol = 1e-10;
constexpr double kNrRatio = 10;
constexpr double kHartmannTol = 1e-6;
constexpr double kMassTol = 0.01;
constexpr double kSpacingTol = 0.01;
constexpr double kRateTol = 0.05;
constexpr double kResonanceTol = 1e-6;
constexpr double kResonanceContrast = 10;
constexpr double kSeriesTol = 0.05;
constexpr double kContinuumRateTol = 0.02;
constexpr double kLorentzTol = 0.05;
constexpr double kBeatTol = 0.02;
constexpr double kCausalityTol = 1e-3;

struct Line {
    int id;
    bool pass;
    std::string text;
};
std::vector<Line> lines;

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

void record(int id, const std::string& title, bool pass, const std::string& detail) {
    lines.push_back({id, pass, title + ": " + detail});
    std::printf("%s [%2d] %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
}

void run_item(int id, const std::string& title, const std::function<std::pair<bool, std::string>()>& f) {
    const auto t = std::chrono::steady_clock::now();
    try {
        auto [pass, detail] = f();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
        record(id, title, pass, detail + " (" + fmt(s) + " s)");
    } catch (const std::exception& e) {
        record(id, title, false, std::string("threw: ") + e.what());
    }
}

// Distribution restricted to the samples inside [lo, hi].
std::vector<std::size_t> indices_between(const ArrivalDistribution& d, double lo, double hi) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < d.t.size(); ++i)
        if (d.t[i] >= lo && d.t[i] <= hi) out.push_back(i);
    return out;
}

// Mass before the light cone, with the early axis [0, start of d] sampled separately.
double causality_fraction(const ArrivalDistribution& d, const WavePacketSpec& spec, double L,
                          const std::function<ArrivalDistribution(const TimeGrid&)>& density) {
    if (d.grid.t_start <= 0) return causality_mass(d, L, spec.x0, 5 * spec.sigma_x());
    const auto early = density({0, d.grid.t_start, 401});
    ArrivalDistribution joined;
    joined.t = early.t;
    joined.P = early.P;
    joined.t.pop_back();
    joined.P.pop_back();
    joined.t.insert(joined.t.end(), d.t.begin(), d.t.end());
    joined.P.insert(joined.P.end(), d.P.begin(), d.P.end());
    return causality_mass(joined, L, spec.x0, 5 * spec.sigma_x());
}

// Schroedinger square barrier, textbook form.
C textbook_T(double k, double V0, double d, double m) {
    const C I(0, 1);
    const double kap = std::sqrt(2 * m * V0 - k * k);
    const C den = std::cosh(kap * d) + I * (kap * kap - k * k) / (2 * k * kap) * std::sinh(kap * d);
    return std::exp(-I * k * d) / den;
}

double nr_deviation(double k, double V0, double d, double m) {
    const C nr = textbook_T(k, V0, d, m);
    return std::abs(square_barrier_amplitudes(k, V0, d, m).T - nr) / std::abs(nr);
}

// ---------------------------------------------------------------------------
// CLI helpers for the figure scenarios

fs::path workdir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("tunnelkit_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cli(const nlohmann::json& config) {
    const auto dir = workdir();
    const std::string name = config.at("name");
    write_json(dir / (name + ".json"), config);
    const std::string cmd = std::string(TUNNELKIT_CLI_PATH) + " run " + (dir / (name + ".json")).string() + " --out " +
                            (dir / "out").string() + " >" + (dir / (name + ".log")).string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Numeric CSV columns by header name; "nan" parses to NaN.
std::map<std::string, std::vector<double>> read_columns(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw std::runtime_error("missing " + p.string());
    std::string line;
    std::getline(f, line);
    std::vector<std::string> names;
    std::stringstream hs(line);
    for (std::string c; std::getline(hs, c, ',');) names.push_back(c);
    std::map<std::string, std::vector<double>> cols;
    while (std::getline(f, line)) {
        std::stringstream rs(line);
        std::size_t i = 0;
        for (std::string c; std::getline(rs, c, ','); ++i) {
            double v = std::numeric_limits<double>::quiet_NaN();
            try {
                v = std::stod(c);
            } catch (...) {
            }
            cols[names.at(i)].push_back(v);
        }
    }
    return cols;
}

// Summary CSV rows keyed by source.
std::map<std::string, std::map<std::string, double>> read_summary(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw std::runtime_error("missing " + p.string());
    std::string line;
    std::getline(f, line);
    std::vector<std::string> names;
    std::stringstream hs(line);
    for (std::string c; std::getline(hs, c, ',');) names.push_back(c);
    std::map<std::string, std::map<std::string, double>> out;
    while (std::getline(f, line)) {
        std::stringstream rs(line);
        std::vector<std::string> cells;
        for (std::string c; std::getline(rs, c, ',');) cells.push_back(c);
        for (std::size_t i = 1; i < cells.size(); ++i) {
            double v = std::numeric_limits<double>::quiet_NaN();
            try {
                v = std::stod(cells[i]);
            } catch (...) {
            }
            out[cells[0]][names[i]] = v;
        }
    }
    return out;
}

// Local maxima above frac * max, merging maxima closer than half the median gap.
std::vector<double> dominant_peaks(const std::vector<double>& t, const std::vector<double>& P, double frac) {
    double top = 0;
    for (double v : P) top = std::max(top, v);
    std::vector<std::pair<double, double>> pk;
    for (std::size_t i = 1; i + 1 < P.size(); ++i)
        if (P[i] > P[i - 1] && P[i] >= P[i + 1] && P[i] > frac * top) pk.emplace_back(t[i], P[i]);
    if (pk.size() < 3) {
        std::vector<double> out;
        for (auto& p : pk) out.push_back(p.first);
        return out;
    }
    std::vector<double> gaps;
    for (std::size_t i = 1; i < pk.size(); ++i) gaps.push_back(pk[i].first - pk[i - 1].first);
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    const double median = gaps[gaps.size() / 2];
    std::vector<std::pair<double, double>> merged{pk.front()};
    for (std::size_t i = 1; i < pk.size(); ++i) {
        if (pk[i].first - merged.back().first < 0.5 * median) {
            if (pk[i].second > merged.back().second) merged.back() = pk[i];
        } else {
            merged.push_back(pk[i]);
        }
    }
    std::vector<double> out;
    for (auto& p : merged) out.push_back(p.first);
    return out;
}

double mean_spacing(const std::vector<double>& ts) { return (ts.back() - ts.front()) / double(ts.size() - 1); }

// ---------------------------------------------------------------------------

struct Shared {
    // item 6
    ArrivalDistribution square;
    WavePacketSpec square_spec;
    double square_L = 0;
    // item 7
    Setup peaks;
    ArrivalDistribution peaks_direct;
    // item 9
    Setup cont, lor1, lor2;
    ArrivalDistribution cont_direct, lor1_direct, lor2_direct;
    bool have6 = false, have7 = false, have9b = false, have9c = false, have9d = false;
};

std::pair<bool, std::string> item1() {
    SplitMix rng(20240611);
    double worst = 0;
    int cases = 0;
    for (int b = 0; b < 1000; ++b) {
        const double m = rng.log_uniform(0.3, 3);
        PotentialProfile prof{m, {}};
        const int kind = b % 3;
        if (kind == 0) {
            prof = square_barrier(rng.uniform(0.01, 0.95) * m, rng.log_uniform(0.05, 50) / m, m);
        } else if (kind == 1) {
            prof = double_barrier(rng.uniform(0.01, 0.95) * m, rng.log_uniform(0.05, 20) / m, rng.log_uniform(0.01, 100) / m, m);
        } else {
            for (int s = 0; s < 3; ++s) prof.segments.push_back({rng.uniform(0, 0.95) * m, rng.log_uniform(0.05, 20) / m});
        }
        for (int j = 0; j < 10; ++j) {
            const double k = rng.log_uniform(1e-3, 3) * m;
            const auto sd = piecewise_amplitudes(prof, k);
            worst = std::max(worst, std::abs(std::norm(sd.T) + std::norm(sd.R) - 1));
            ++cases;
        }
    }
    return {worst <= kUnitarityTol, std::to_string(cases) + " cases, max | |T|^2+|R|^2-1 | = " + fmt(worst) +
                                        " (tol " + fmt(kUnitarityTol) + ")"};
}

std::pair<bool, std::string> item2() {
    const double m = 1, V0 = 0.5, a = 3, r = 10, d = 5;
    const double kmax = tunneling_momentum_limit(V0, m);
    double worst = 0, worst_comp = 0;
    for (int i = 0; i < 500; ++i) {
        const double k = kmax * (0.002 + 0.996 * i / 499.0);
        const auto tm = piecewise_amplitudes(square_barrier(V0, d, m), k);
        const auto cf = square_barrier_amplitudes(k, V0, d, m);
        worst = std::max({worst, std::abs(tm.T - cf.T) / std::abs(cf.T), std::abs(tm.R - cf.R)});
        const auto tm2 = piecewise_amplitudes(double_barrier(V0, a, r, m), k);
        const auto cf2 = double_barrier_T(k, V0, a, r, m);
        worst = std::max({worst, std::abs(tm2.T - cf2.T) / std::abs(cf2.T), std::abs(tm2.R - cf2.R)});
        const C comp = double_barrier_T_composed(k, V0, a, r, m);
        worst_comp = std::max(worst_comp, std::abs(comp - cf2.T) / std::abs(cf2.T));
    }
    return {worst <= kOracleTol && worst_comp <= kCompositionTol,
            "transfer vs closed forms " + fmt(worst) + " (tol " + fmt(kOracleTol) + "), composition " +
                fmt(worst_comp) + " (tol " + fmt(kCompositionTol) + ")"};
}

std::pair<bool, std::string> item3() {
    const double m = 1, V0 = 0.5, a = 2.5;
    const double kmax = tunneling_momentum_limit(V0, m);
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        const double k = kmax * (0.005 + 0.99 * i / 199.0);
        const auto single = square_barrier_amplitudes(k, V0, 2 * a, m);
        const auto closed = double_barrier_T(k, V0, a, 0, m);
        const auto adjacent = piecewise_amplitudes(PotentialProfile{m, {{V0, a}, {V0, a}}}, k);
        worst = std::max({worst, std::abs(closed.T - single.T) / std::abs(single.T), std::abs(closed.R - single.R),
                          std::abs(adjacent.T - single.T) / std::abs(single.T), std::abs(adjacent.R - single.R)});
    }
    return {worst <= kMergeTol, "max deviation " + fmt(worst) + " (tol " + fmt(kMergeTol) + ")"};
}

std::pair<bool, std::string> item4() {
    // c -> infinity: k, d and m V0 fixed, m = s
    const double k = 0.3, d = 5, U = 0.5;
    std::vector<double> dev;
    for (double s : {10.0, 100.0, 1000.0}) dev.push_back(nr_deviation(k, U / s, d, s));
    const double r1 = dev[0] / dev[1], r2 = dev[1] / dev[2];
    std::vector<double> lit;
    for (double s : {10.0, 100.0, 1000.0}) lit.push_back(nr_deviation(k, 0.5, d, s));
    return {r1 >= kNrRatio && r2 >= kNrRatio,
            "deviation " + fmt(dev[0]) + ", " + fmt(dev[1]) + ", " + fmt(dev[2]) + " at s = 10, 100, 1000; ratios " +
                fmt(r1) + ", " + fmt(r2) + " (need >= " + fmt(kNrRatio) + "). Note: with V0 itself held fixed the ratios are " +
                fmt(lit[0] / lit[1]) + ", " + fmt(lit[1] / lit[2]) + " (lambda d grows like sqrt(m))"};
}

std::pair<bool, std::string> item5() {
    const double m = 1, V0 = 0.5, p = 0.3;
    const double lambda = barrier_functions(p, V0, m).lambda;
    const double opaque = tunneling_time_opaque(p, V0, m);
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (double ld = 5; ld <= 20 + 1e-12; ld += 0.1) {
        const double gap = std::abs(tunneling_time_closed(p, V0, ld / lambda, m) - opaque);
        if (gap > prev + 1e-15 * opaque) monotone = false;
        prev = gap;
    }
    const double rel = std::abs(tunneling_time_closed(p, V0, 20 / lambda, m) - opaque) / opaque;
    return {monotone && rel < kHartmannTol, "relative gap at lambda d = 20: " + fmt(rel) + " (tol " + fmt(kHartmannTol) +
                                                "), monotone on lambda d in [5, 20]: " + (monotone ? "yes" : "no")};
}

std::pair<bool, std::string> item6(Shared& sh) {
    const double d = 5, V0 = 0.5, p = 0.3;
    WavePacketSpec s{PacketShape::gaussian, p, 0.01 * p, 0};
    s.x0 = d / 2 + 12 * s.sigma_x();
    const double L = 100 * d;
    const auto prof = square_barrier(V0, d);
    const double v = relativistic_kinematics(p, 1).v;
    const double t_sp = (s.x0 + L) / v + delay_time(p, prof); // (x0 + L + phi') / v
    const double w = s.sigma_x() / v;
    const TimeGrid grid{t_sp - 12 * w, t_sp + 12 * w, 2401};
    const auto dist = arrival_density(grid, s, prof, {L, 1.0});
    const auto peaks = detect_peaks(dist);
    if (peaks.empty()) return {false, "no peak detected"};
    const auto top = std::max_element(peaks.begin(), peaks.end(),
                                      [](const auto& a, const auto& b) { return a.height < b.height; });
    const double off = std::abs(top->t - t_sp);
    const double Tp = total_transmission(s, prof);
    const double mass_rel = std::abs(dist.mass() - Tp) / Tp;
    sh.square = dist;
    sh.square_spec = s;
    sh.square_L = L;
    sh.have6 = true;
    return {off <= grid.step() && mass_rel <= kMassTol,
            "peak offset " + fmt(off) + " (grid step " + fmt(grid.step()) + "), mass vs total_transmission " +
                fmt(mass_rel) + " (tol " + fmt(kMassTol) + ")"};
}

std::pair<bool, std::string> item7(Shared& sh) {
    sh.peaks = regimes::peak_series_setup();
    const auto& s = sh.peaks;
    const auto& o = s.obs;
    const double w = s.spec.sigma_x() / o.v;
    const double t_end = o.t0 + 12.5 * o.dt;
    const TimeGrid grid{o.t0 - 6 * w, t_end, std::size_t((t_end - o.t0 + 6 * w) / (w / 12)) + 1};
    const auto dist = arrival_density(grid, s.spec, s.db.profile(), {s.L, 1.0});
    sh.peaks_direct = dist;
    sh.have7 = true;
    const auto peaks = detect_peaks(dist);
    if (peaks.size() < 3) return {false, "only " + std::to_string(peaks.size()) + " peaks detected"};
    std::vector<double> ts;
    for (const auto& pk : peaks) ts.push_back(pk.t);
    const double spacing = mean_spacing(ts);
    const double dt_formula = 2 * (s.db.r / o.v + o.tau);
    const double spacing_rel = std::abs(spacing - dt_formula) / dt_formula;
    const double first_off = std::abs(peaks.front().t - o.t0);
    const auto fit = fit_exponential(dist, {}, FitMode::peaks);
    const double gamma = o.abs_T0_sq / (s.db.r / o.v + o.tau);
    const double rate_rel = std::abs(fit.rate - gamma) / gamma;
    const bool ok = spacing_rel <= kSpacingTol && first_off <= grid.step() && rate_rel <= kRateTol &&
                    o.abs_T0_sq <= 0.05;
    return {ok, std::to_string(peaks.size()) + " peaks on " + std::to_string(grid.n) + " samples, |T0|^2 = " +
                    fmt(o.abs_T0_sq) + "; spacing " + fmt(spacing_rel) + " (tol " + fmt(kSpacingTol) +
                    "); first peak offset " + fmt(first_off) + " (grid step " + fmt(grid.step()) +
                    "); envelope rate " + fmt(rate_rel) + " (tol " + fmt(kRateTol) + ")"};
}

std::pair<bool, std::string> item8() {
    const double V0 = 0.5, m = 1;
    const double kmax = tunneling_momentum_limit(V0, m);
    double worst = 0;
    std::size_t count = 0;
    for (double a : {1.0, 3.0, 4.0})
        for (double r : {5.0, 40.0, 500.0}) {
            for (double k : find_resonances(V0, a, r, m, 0.01 * kmax, 0.99 * kmax)) {
                worst = std::max(worst, 1 - std::abs(piecewise_amplitudes(double_barrier(V0, a, r, m), k).T));
                ++count;
            }
        }
    // opaque pair: packet on a line versus half way to the next one
    const double a = 4, r = 500;
    const auto ks = find_resonances(V0, a, r, m, 0.78, 0.82);
    if (ks.size() < 2) return {false, "too few resonances near p = 0.8"};
    const double dk = ks[1] - ks[0];
    const auto prof = double_barrier(V0, a, r, m);
    const WavePacketSpec on{PacketShape::gaussian, ks[0], dk / 40, 1e5};
    const WavePacketSpec off{PacketShape::gaussian, ks[0] + dk / 2, dk / 40, 1e5};
    const double ratio = total_transmission(on, prof) / total_transmission(off, prof);
    return {count > 0 && worst <= kResonanceTol && ratio >= kResonanceContrast,
            std::to_string(count) + " resonances, max 1 - |T(k_n)| = " + fmt(worst) + " (tol " + fmt(kResonanceTol) +
                "); on/off-resonance transmission " + fmt(ratio) + " (need >= " + fmt(kResonanceContrast) + ")"};
}

std::pair<bool, std::string> item9(Shared& sh) {
    std::string detail;
    bool ok = true;

    // (a) peak series near each peak, item 7 data
    {
        if (!sh.have7) throw std::runtime_error("item 7 data unavailable");
        const auto& s = sh.peaks;
        const double w = s.spec.sigma_x() / s.obs.v;
        const auto series = peak_series_density(sh.peaks_direct.grid, s.spec, s.L, s.db);
        double worst = 0;
        for (const auto& pk : detect_peaks(sh.peaks_direct))
            for (std::size_t i : indices_between(sh.peaks_direct, pk.t - w, pk.t + w))
                worst = std::max(worst, std::abs(series.P[i] - sh.peaks_direct.P[i]) / sh.peaks_direct.P[i]);
        ok = ok && worst <= kSeriesTol;
        detail += "peak series " + fmt(worst) + " (tol " + fmt(kSeriesTol) + ")";
    }
    // (b) continuum late rate, sigma v dt = 0.5
    {
        sh.cont = regimes::continuum_setup();
        const auto& s = sh.cont;
        const auto& o = s.obs;
        const double w = s.spec.sigma_x() / o.v;
        const TimeGrid grid{o.t0 - 8 * w, o.t0 + 4 / o.gamma, 1201};
        sh.cont_direct = arrival_density(grid, s.spec, s.db.profile(), {s.L, 1.0});
        sh.have9b = true;
        const FitWindow late{o.t0 + 2 / o.gamma, o.t0 + 4 / o.gamma};
        const auto fd = fit_exponential(sh.cont_direct, late, FitMode::raw);
        const auto fc = fit_exponential(continuum_density(grid, s.spec, s.L, s.db), late, FitMode::raw);
        const double rel = std::abs(fc.rate - fd.rate) / fd.rate;
        ok = ok && rel <= kContinuumRateTol;
        detail += "; continuum rate " + fmt(rel) + " at sigma v dt = " + fmt(s.spec.sigma * o.v * o.dt) + " (tol " +
                  fmt(kContinuumRateTol) + ")";
    }
    // (c) single resonance against the Lorentzian transmission model
    {
        sh.lor1 = regimes::lorentzian_setup(1);
        const auto& s = sh.lor1;
        const auto& o = s.obs;
        const double sv = s.spec.sigma * o.v;
        const TimeGrid grid{o.t0 - 10 / sv, o.t0 + 6 / s.res[0].gamma, 1501};
        sh.lor1_direct = arrival_density(grid, s.spec, lorentzian_model(s.db, s.res), {s.L, 1.0});
        sh.have9c = true;
        const auto cf = resonance_density(grid, s.spec, s.L, s.db, s.res[0]);
        double worst = 0;
        for (std::size_t i : indices_between(sh.lor1_direct, o.t0 + 5 / sv, grid.t_end))
            worst = std::max(worst, std::abs(cf.P[i] - sh.lor1_direct.P[i]) / sh.lor1_direct.P[i]);
        ok = ok && worst <= kLorentzTol;
        detail += "; resonance formula " + fmt(worst) + " after the transient (tol " + fmt(kLorentzTol) + ")";
    }
    // (d) two-resonance beat in direct quadrature
    {
        sh.lor2 = regimes::lorentzian_setup(2);
        const auto& s = sh.lor2;
        const auto& o = s.obs;
        const double sv = s.spec.sigma * o.v;
        const double expected = o.v * std::abs(s.res[1].k - s.res[0].k);
        const double period = 2 * kPi / expected;
        const TimeGrid grid{o.t0 + 10 / sv, o.t0 + 10 / sv + 30 * period, 1777};
        sh.lor2_direct = arrival_density(grid, s.spec, lorentzian_model(s.db, s.res), {s.L, 1.0});
        sh.have9d = true;
        const auto peaks = dominant_peaks(sh.lor2_direct.t, sh.lor2_direct.P, 1e-3);
        const double freq = 2 * kPi / mean_spacing(peaks);
        const double rel = std::abs(freq - expected) / expected;
        ok = ok && peaks.size() >= 20 && rel <= kBeatTol;
        detail += "; beat frequency " + fmt(rel) + " over " + std::to_string(peaks.size()) + " beats (tol " +
                  fmt(kBeatTol) + ")";
    }
    return {ok, detail};
}

std::pair<bool, std::string> item10(const Shared& sh) {
    std::vector<std::pair<std::string, double>> fr;
    if (sh.have6)
        fr.emplace_back("item 6", causality_fraction(sh.square, sh.square_spec, sh.square_L, [&](const TimeGrid& g) {
                            return arrival_density(g, sh.square_spec, square_barrier(0.5, 5), {sh.square_L, 1.0});
                        }));
    auto db_case = [&](const char* label, const Setup& s, const ArrivalDistribution& d, bool lorentz_model) {
        fr.emplace_back(label, causality_fraction(d, s.spec, s.L, [&](const TimeGrid& g) {
                            if (lorentz_model) return arrival_density(g, s.spec, lorentzian_model(s.db, s.res), {s.L, 1.0});
                            return arrival_density(g, s.spec, s.db.profile(), {s.L, 1.0});
                        }));
    };
    if (sh.have7) db_case("item 7", sh.peaks, sh.peaks_direct, false);
    if (sh.have9b) db_case("item 9 continuum", sh.cont, sh.cont_direct, false);
    if (sh.have9c) db_case("item 9 resonance", sh.lor1, sh.lor1_direct, true);
    if (sh.have9d) db_case("item 9 beats", sh.lor2, sh.lor2_direct, true);
    if (fr.size() < 5) return {false, "missing densities from items 6-9"};
    bool ok = true;
    std::string detail;
    for (const auto& [label, f] : fr) {
        ok = ok && f < kCausalityTol;
        detail += (detail.empty() ? "" : ", ") + label + " " + fmt(f);
    }
    return {ok, detail + " (tol " + fmt(kCausalityTol) + ")"};
}

std::pair<bool, std::string> item11() {
    using json = nlohmann::json;
    const auto out = workdir() / "out";
    std::string detail;
    bool ok = true;

    // Fig. 1: tau_p over the tunneling window at d = 5000/m
    {
        const std::vector<double> heights{0.1, 0.3, 0.5, 0.7, 0.9};
        json cfg{{"name", "fig1"}, {"task", "tunneling-time-scan"}, {"mass", 1.0},
                 {"barrier", {{"type", "square"}, {"V0", 0.5}, {"d", 5000}}},
                 {"tunneling_scan", {{"V0", heights}, {"n", 200}, {"p_fraction", {0.01, 0.99}}}}};
        const int code = run_cli(cfg);
        bool shape = code == 0;
        double worst = 0, prev_min = std::numeric_limits<double>::infinity();
        for (double V0 : heights) {
            char file[64];
            std::snprintf(file, sizeof file, "fig1_V0_%.6g.csv", V0);
            const auto cols = read_columns(out / file);
            const auto& p = cols.at("p");
            const auto& tau = cols.at("tau");
            const std::size_t im = std::size_t(std::min_element(tau.begin(), tau.end()) - tau.begin());
            shape = shape && im > 0 && im + 1 < tau.size();
            for (std::size_t i = 0; i < tau.size(); ++i) {
                shape = shape && tau[i] > 0;
                if (i > 0 && i <= im) shape = shape && tau[i] < tau[i - 1];
                if (i > im) shape = shape && tau[i] > tau[i - 1];
                worst = std::max(worst, std::abs(tau[i] - tunneling_time_closed(p[i], V0, 5000, 1)) /
                                            tunneling_time_closed(p[i], V0, 5000, 1));
            }
            shape = shape && tau.front() > 2 * tau[im] && tau.back() > 2 * tau[im];
            shape = shape && tau[im] < prev_min; // lower curves for higher barriers
            prev_min = tau[im];
        }
        ok = ok && shape && worst <= 1e-6;
        detail += std::string("Fig.1 U-shaped positive curves ") + (shape ? "yes" : "no") + ", vs closed form " + fmt(worst);
    }
    // Fig. 2: separated peak train
    {
        const Setup s = regimes::peak_series_setup();
        json cfg{{"name", "fig2"}, {"task", "arrival-density"},
                 {"barrier", {{"type", "double"}, {"V0", s.db.V0}, {"a", s.db.a}, {"r", s.db.r}}},
                 {"packet", {{"shape", "gaussian"}, {"p", s.spec.p}, {"sigma", s.spec.sigma}, {"x0", "auto"}}},
                 {"detector", {{"L", "auto"}}},
                 {"time_grid", {{"t_start", -5 * s.spec.sigma_x() / s.obs.v}, {"t_end", 8.5 * s.obs.dt}, {"n", 1700},
                                {"relative", true}}}};
        const int code = run_cli(cfg);
        const auto cols = read_columns(out / "fig2.csv");
        ArrivalDistribution d;
        d.t = cols.at("t");
        d.P = cols.at("P");
        const auto peaks = detect_peaks(d);
        std::vector<double> ts;
        for (const auto& pk : peaks) ts.push_back(pk.t);
        const double rel = ts.size() >= 2 ? std::abs(mean_spacing(ts) - s.obs.dt) / s.obs.dt : 1.0;
        bool decreasing = true;
        for (std::size_t i = 1; i < peaks.size(); ++i) decreasing = decreasing && peaks[i].height < peaks[i - 1].height;
        const bool pass = code == 0 && peaks.size() == 9 && rel <= kSpacingTol && decreasing;
        ok = ok && pass;
        detail += "; Fig.2 " + std::to_string(peaks.size()) + " decreasing peaks, spacing " + fmt(rel);
    }
    // Fig. 3: continuum regime comparison
    {
        const Setup s = regimes::continuum_setup();
        const auto& o = s.obs;
        json cfg{{"name", "fig3"}, {"task", "regime-compare"},
                 {"barrier", {{"type", "double"}, {"V0", s.db.V0}, {"a", s.db.a}, {"r", s.db.r}}},
                 {"packet", {{"shape", "gaussian"}, {"p", s.spec.p}, {"sigma", s.spec.sigma}, {"x0", "auto"}}},
                 {"detector", {{"L", "auto"}}},
                 {"time_grid", {{"t_start", -8 * s.spec.sigma_x() / o.v}, {"t_end", 4 / o.gamma}, {"n", 1000}, {"relative", true}}},
                 {"fit", {{"mode", "raw"}, {"t_lo", 2 / o.gamma}, {"t_hi", 4 / o.gamma}, {"relative", true}}}};
        const int code = run_cli(cfg);
        const auto sum = read_summary(out / "fig3_summary.csv");
        const double rel = std::abs(sum.at("continuum").at("gamma") - sum.at("direct").at("gamma")) / sum.at("direct").at("gamma");
        const bool pass = code == 0 && rel <= kContinuumRateTol;
        ok = ok && pass;
        detail += "; Fig.3 continuum vs direct rate " + fmt(rel);
    }
    // Fig. 4: single resonance, Lorentzian packet
    {
        const Setup s = regimes::lorentzian_setup(1);
        const auto& o = s.obs;
        const double sv = s.spec.sigma * o.v, g = s.res[0].gamma;
        json cfg{{"name", "fig4"}, {"task", "regime-compare"},
                 {"barrier", {{"type", "double"}, {"V0", s.db.V0}, {"a", s.db.a}, {"r", s.db.r}}},
                 {"packet", {{"shape", "lorentzian"}, {"p", s.spec.p}, {"sigma", s.spec.sigma}, {"x0", "auto"}}},
                 {"detector", {{"L", "auto"}}},
                 {"time_grid", {{"t_start", -10 / sv}, {"t_end", 6 / g}, {"n", 800}, {"relative", true}}},
                 {"fit", {{"mode", "raw"}, {"t_lo", 2 / g}, {"t_hi", 6 / g}, {"relative", true}}}};
        const int code = run_cli(cfg);
        const auto sum = read_summary(out / "fig4_summary.csv");
        const double rd = sum.at("direct").at("gamma"), rr = sum.at("resonance").at("gamma");
        const double rel = std::abs(rr - rd) / rd;
        const bool pass = code == 0 && rel <= kContinuumRateTol && sum.at("direct").at("r2") > 0.999;
        ok = ok && pass;
        detail += "; Fig.4 exponential tail r2 " + fmt(sum.at("direct").at("r2")) + ", rate vs formula " + fmt(rel);
    }
    // Fig. 5: two resonances beat
    {
        const Setup s = regimes::lorentzian_setup(2);
        const auto& o = s.obs;
        const double sv = s.spec.sigma * o.v;
        const double expected = o.v * std::abs(s.res[1].k - s.res[0].k);
        const double period = 2 * kPi / expected;
        json cfg{{"name", "fig5"}, {"task", "regime-compare"},
                 {"barrier", {{"type", "double"}, {"V0", s.db.V0}, {"a", s.db.a}, {"r", s.db.r}}},
                 {"packet", {{"shape", "lorentzian"}, {"p", s.spec.p}, {"sigma", s.spec.sigma}, {"x0", "auto"}}},
                 {"detector", {{"L", "auto"}}},
                 {"time_grid", {{"t_start", 10 / sv}, {"t_end", 10 / sv + 20 * period}, {"n", 1200}, {"relative", true}}}};
        const int code = run_cli(cfg);
        const auto cols = read_columns(out / "fig5.csv");
        const auto peaks = dominant_peaks(cols.at("t"), cols.at("P_direct"), 0.05);
        const double rel = peaks.size() >= 2 ? std::abs(2 * kPi / mean_spacing(peaks) - expected) / expected : 1.0;
        const bool pass = code == 0 && peaks.size() >= 15 && rel <= kBeatTol;
        ok = ok && pass;
        detail += "; Fig.5 " + std::to_string(peaks.size()) + " beats, frequency " + fmt(rel);
    }
    return {ok, detail};
}

} // namespace

int main() {
    Shared sh;
    run_item(1, "unitarity", item1);
    run_item(2, "oracle equivalence", item2);
    run_item(3, "merge identity", item3);
    run_item(4, "non-relativistic limit", item4);
    run_item(5, "Hartmann saturation", item5);
    run_item(6, "stationary-phase peak", [&] { return item6(sh); });
    run_item(7, "double-barrier structure", [&] { return item7(sh); });
    run_item(8, "resonances", item8);
    run_item(9, "regime cross-validation", [&] { return item9(sh); });
    run_item(10, "causality", [&] { return item10(sh); });
    run_item(11, "figure shapes via CLI", item11);

    int failed = 0;
    for (const auto& l : lines) failed += l.pass ? 0 : 1;
    std::printf("%d/%zu criteria passed\n", int(lines.size()) - failed, lines.size());
    fs::remove_all(workdir());
    return failed == 0 ? 0 : 1;
}
