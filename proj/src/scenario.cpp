#include "tunnelkit/scenario.hpp"

#include "tunnelkit/io.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

namespace tunnelkit {

namespace {

using json = nlohmann::json;

std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

// Object node with its path; remembers which keys were read so that
// anything left over can be reported as unknown.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_, "expected an object");
    }

    std::string path(const std::string& key) const { return join(path_, key); }

    bool has(const std::string& key) {
        used_.insert(key);
        return j_.contains(key);
    }

    const json& raw(const std::string& key) {
        if (!has(key)) throw ConfigError(path(key), "required field missing");
        return j_.at(key);
    }

    double number(const std::string& key) { return as_number(raw(key), path(key)); }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::size_t count(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ConfigError(path(key), "expected a non-negative integer");
        return v.get<std::size_t>();
    }
    std::size_t count(const std::string& key, std::size_t fallback) { return has(key) ? count(key) : fallback; }

    std::string text(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_string()) throw ConfigError(path(key), "expected a string");
        return v.get<std::string>();
    }

    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_array()) throw ConfigError(path(key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i)
            out.push_back(as_number(v[i], path(key) + "[" + std::to_string(i) + "]"));
        return out;
    }

    Reader object(const std::string& key) { return Reader(raw(key), path(key)); }

    void finish() const {
        for (const auto& item : j_.items())
            if (!used_.count(item.key())) throw ConfigError(path(item.key()), "unknown field");
    }

    static double as_number(const json& v, const std::string& path) {
        if (!v.is_number()) throw ConfigError(path, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
        return x;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

Task parse_task(const std::string& s, const std::string& path) {
    for (Task t : {Task::transmission_scan, Task::arrival_density, Task::tunneling_time_scan, Task::resonance_scan,
                   Task::decay_fit, Task::regime_compare})
        if (to_string(t) == s) return t;
    throw ConfigError(path, "unknown task '" + s + "'");
}

void require_positive(double x, const std::string& path) {
    if (!(x > 0)) throw ConfigError(path, "must be positive");
}

void check_height(double V0, double m, const std::string& path) {
    if (!(V0 >= 0)) throw ConfigError(path, "must be non-negative");
    if (!(V0 < m)) throw ConfigError(path, "must lie below the mass");
}

void parse_barrier(Reader b, Scenario& s) {
    const double m = s.profile.mass;
    const std::string type = b.text("type");
    if (type == "free") {
        s.profile.segments.clear();
    } else if (type == "square") {
        const double V0 = b.number("V0"), d = b.number("d");
        check_height(V0, m, b.path("V0"));
        require_positive(d, b.path("d"));
        s.profile = square_barrier(V0, d, m);
    } else if (type == "double") {
        const double V0 = b.number("V0"), a = b.number("a"), r = b.number("r");
        check_height(V0, m, b.path("V0"));
        require_positive(a, b.path("a"));
        if (!(r >= 0)) throw ConfigError(b.path("r"), "must be non-negative");
        s.profile = double_barrier(V0, a, r, m);
    } else if (type == "segments") {
        const auto& list = b.raw("segments");
        if (!list.is_array() || list.empty()) throw ConfigError(b.path("segments"), "expected a non-empty array");
        s.profile.segments.clear();
        for (std::size_t i = 0; i < list.size(); ++i) {
            Reader seg(list[i], b.path("segments") + "[" + std::to_string(i) + "]");
            const double v = seg.number("v"), w = seg.number("w");
            if (!(w > 0)) throw ConfigError(seg.path("w"), "segment width must be positive");
            check_height(v, m, seg.path("v"));
            s.profile.segments.push_back({v, w});
            seg.finish();
        }
    } else {
        throw ConfigError(b.path("type"), "expected free, square, double or segments");
    }
    try {
        s.profile.validate();
    } catch (const ConfigError& e) {
        throw e.prefixed("barrier");
    }
    s.double_barrier = as_double_barrier(s.profile);
    b.finish();
}

WavePacketSpec parse_packet(Reader r) {
    WavePacketSpec p;
    const std::string shape = r.text("shape");
    if (shape == "gaussian") p.shape = PacketShape::gaussian;
    else if (shape == "lorentzian") p.shape = PacketShape::lorentzian;
    else throw ConfigError(r.path("shape"), "expected gaussian or lorentzian");
    p.p = r.number("p");
    p.sigma = r.number("sigma");
    p.x0 = std::numeric_limits<double>::quiet_NaN(); // resolved later when "auto"
    if (r.has("x0")) {
        const auto& v = r.raw("x0");
        if (!(v.is_string() && v.get<std::string>() == "auto")) p.x0 = Reader::as_number(v, r.path("x0"));
    }
    r.finish();
    return p;
}

Absorption parse_absorption(Reader& d) {
    if (!d.has("alpha")) return Absorption(1.0);
    const auto& v = d.raw("alpha");
    if (v.is_number()) {
        const double a = Reader::as_number(v, d.path("alpha"));
        if (!(a >= 0 && a <= 1)) throw ConfigError(d.path("alpha"), "must lie in [0, 1]");
        return Absorption(a);
    }
    Reader t(v, d.path("alpha"));
    auto ks = t.numbers("k");
    auto as = t.numbers("alpha");
    t.finish();
    try {
        return Absorption(std::move(ks), std::move(as));
    } catch (const ConfigError& e) {
        throw e.prefixed(d.path("alpha"));
    }
}

// First arrival predicted by stationary phase: t0 for a double barrier in the
// tunneling range, (L + x0)/v + t_d otherwise.
double predicted_arrival(const Scenario& s) {
    const auto& pk = *s.packet;
    const double L = s.detector->L;
    if (s.double_barrier && pk.p < tunneling_momentum_limit(s.double_barrier->V0, s.profile.mass))
        return double_barrier_observables(pk, L, *s.double_barrier).t0;
    const double v = relativistic_kinematics(pk.p, s.profile.mass).v;
    return (L + pk.x0) / v + delay_time(pk.p, s.profile);
}

void require(bool present, const std::string& section, Task t) {
    if (!present) throw ConfigError(section, "required for task " + to_string(t));
}

bool valid_name(const std::string& n) {
    if (n.empty()) return false;
    for (char c : n)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    return true;
}

} // namespace

std::string to_string(Task t) {
    switch (t) {
    case Task::transmission_scan: return "transmission-scan";
    case Task::arrival_density: return "arrival-density";
    case Task::tunneling_time_scan: return "tunneling-time-scan";
    case Task::resonance_scan: return "resonance-scan";
    case Task::decay_fit: return "decay-fit";
    case Task::regime_compare: return "regime-compare";
    }
    return "unknown";
}

std::vector<double> MomentumGrid::points() const {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = n > 1 ? k_min + (k_max - k_min) * double(i) / double(n - 1) : k_min;
    return out;
}

Scenario parse_scenario(const json& config) {
    Scenario s;
    s.config = config;
    Reader root(config, "");
    s.name = root.text("name");
    if (!valid_name(s.name)) throw ConfigError("name", "use letters, digits, '_', '-' and '.' only");
    s.task = parse_task(root.text("task"), "task");
    s.profile.mass = root.number("mass", 1.0);
    require_positive(s.profile.mass, "mass");

    if (root.has("barrier")) parse_barrier(root.object("barrier"), s);
    else throw ConfigError("barrier", "required field missing");

    if (root.has("numerics")) {
        Reader n = root.object("numerics");
        s.rel_tol = n.number("rel_tol", s.rel_tol);
        if (!(s.rel_tol > 0 && s.rel_tol <= 1e-2)) throw ConfigError(n.path("rel_tol"), "must lie in (0, 1e-2]");
        if (n.has("composition")) {
            const auto c = n.text("composition");
            if (c == "scaled") s.composition = Composition::scaled;
            else if (c == "direct") s.composition = Composition::direct;
            else throw ConfigError(n.path("composition"), "expected scaled or direct");
        }
        s.threads = unsigned(n.count("threads", 0));
        n.finish();
    }

    const double extent = s.profile.extent();
    if (root.has("packet")) {
        s.packet = parse_packet(root.object("packet"));
        auto& pk = *s.packet;
        const bool automatic = std::isnan(pk.x0);
        if (automatic) pk.x0 = 1; // placeholder until sigma is known to be valid
        try {
            pk.validate();
        } catch (const ConfigError& e) {
            throw e.prefixed("packet");
        }
        if (automatic) pk.x0 = extent / 2 + 10 * pk.sigma_x();
        if (pk.x0 < extent / 2 + 5 * pk.sigma_x())
            warn(&s.warnings, "packet.x0 = " + format_double(pk.x0) + " leaves the initial packet overlapping the barrier");
    }
    if (root.has("detector")) {
        Reader d = root.object("detector");
        DetectorSpec det;
        if (!d.has("L")) throw ConfigError(d.path("L"), "required field missing");
        const auto& Lv = d.raw("L");
        if (Lv.is_string() && Lv.get<std::string>() == "auto") {
            if (!(extent > 0)) throw ConfigError(d.path("L"), "auto placement needs a barrier");
            det.L = 10 * extent;
        } else {
            det.L = Reader::as_number(Lv, d.path("L"));
        }
        det.alpha = parse_absorption(d);
        d.finish();
        try {
            validate_detector(det, extent, &s.warnings);
        } catch (const ConfigError& e) {
            throw e.prefixed("detector");
        }
        s.detector = det;
    }
    if (root.has("k_grid")) {
        Reader g = root.object("k_grid");
        MomentumGrid k{g.number("k_min"), g.number("k_max"), g.count("n")};
        require_positive(k.k_min, g.path("k_min"));
        if (!(k.k_max > k.k_min)) throw ConfigError(g.path("k_max"), "must exceed k_min");
        if (k.n < 2) throw ConfigError(g.path("n"), "needs at least two points");
        g.finish();
        s.k_grid = k;
    }
    if (root.has("tunneling_scan")) {
        Reader g = root.object("tunneling_scan");
        if (g.has("V0")) {
            s.tunneling.V0 = g.numbers("V0");
            if (s.tunneling.V0.empty()) throw ConfigError(g.path("V0"), "expected at least one height");
            for (std::size_t i = 0; i < s.tunneling.V0.size(); ++i) {
                const auto p = g.path("V0") + "[" + std::to_string(i) + "]";
                require_positive(s.tunneling.V0[i], p);
                check_height(s.tunneling.V0[i], s.profile.mass, p);
            }
        }
        s.tunneling.n = g.count("n", s.tunneling.n);
        if (s.tunneling.n < 2) throw ConfigError(g.path("n"), "needs at least two points");
        if (g.has("p_fraction")) {
            const auto f = g.numbers("p_fraction");
            if (f.size() != 2 || !(f[0] > 0 && f[0] < f[1] && f[1] < 1))
                throw ConfigError(g.path("p_fraction"), "expected [lo, hi] with 0 < lo < hi < 1");
            s.tunneling.f_lo = f[0];
            s.tunneling.f_hi = f[1];
        }
        g.finish();
    }
    if (root.has("resonance_window")) {
        Reader g = root.object("resonance_window");
        const double lo = g.number("k_min"), hi = g.number("k_max");
        require_positive(lo, g.path("k_min"));
        if (!(hi > lo)) throw ConfigError(g.path("k_max"), "must exceed k_min");
        g.finish();
        s.resonance_window = {lo, hi};
    }
    std::optional<json> grid_node, fit_node;
    if (root.has("time_grid")) grid_node = root.raw("time_grid");
    if (root.has("fit")) fit_node = root.raw("fit");
    root.finish();

    // task requirements
    const Task t = s.task;
    const bool needs_packet = t == Task::arrival_density || t == Task::decay_fit || t == Task::regime_compare;
    if (t == Task::transmission_scan) require(s.k_grid.has_value(), "k_grid", t);
    if (needs_packet) {
        require(s.packet.has_value(), "packet", t);
        require(s.detector.has_value(), "detector", t);
        require(grid_node.has_value(), "time_grid", t);
    }
    if (t == Task::tunneling_time_scan) {
        if (s.profile.segments.size() != 1) throw ConfigError("barrier.type", "tunneling-time-scan needs a square barrier");
        if (s.tunneling.V0.empty()) s.tunneling.V0 = {s.profile.segments[0].v};
    }
    if (t == Task::resonance_scan || t == Task::decay_fit || t == Task::regime_compare) {
        if (!s.double_barrier) throw ConfigError("barrier.type", to_string(t) + " needs a double barrier with r > 0");
    }
    if ((t == Task::decay_fit || t == Task::regime_compare) &&
        !(s.packet->p < tunneling_momentum_limit(s.double_barrier->V0, s.profile.mass)))
        throw ConfigError("packet.p", "must lie in the tunneling range of the barrier");

    if (grid_node) {
        Reader g(*grid_node, "time_grid");
        TimeGrid grid{g.number("t_start"), g.number("t_end"), g.count("n")};
        const bool relative = g.flag("relative", false);
        g.finish();
        if (relative) {
            if (!s.packet || !s.detector)
                throw ConfigError("time_grid.relative", "relative grids need a packet and a detector");
            const double t0 = predicted_arrival(s);
            grid.t_start += t0;
            grid.t_end += t0;
        }
        try {
            grid.validate();
        } catch (const ConfigError& e) {
            throw e.prefixed("time_grid");
        }
        s.time_grid = grid;
    }
    if (fit_node) {
        Reader f(*fit_node, "fit");
        if (f.has("mode")) {
            const auto m = f.text("mode");
            if (m == "peaks") s.fit_mode = FitMode::peaks;
            else if (m == "raw") s.fit_mode = FitMode::raw;
            else throw ConfigError(f.path("mode"), "expected peaks or raw");
        }
        s.fit_window.t_lo = f.number("t_lo", s.fit_window.t_lo);
        s.fit_window.t_hi = f.number("t_hi", s.fit_window.t_hi);
        const bool relative = f.flag("relative", false);
        f.finish();
        if (relative) {
            if (!s.packet || !s.detector) throw ConfigError("fit.relative", "relative windows need a packet and a detector");
            const double t0 = predicted_arrival(s);
            s.fit_window.t_lo += t0;
            s.fit_window.t_hi += t0;
        }
        if (!(s.fit_window.t_hi > s.fit_window.t_lo)) throw ConfigError("fit.t_hi", "must exceed t_lo");
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_json(path)); }

namespace {

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

ArrivalOptions arrival_options(const Scenario& s, unsigned threads, Warnings* w) {
    ArrivalOptions o;
    o.rel_tol = s.rel_tol;
    o.threads = threads ? threads : s.threads;
    o.warnings = w;
    return o;
}

std::string v0_label(double V0) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", V0);
    return buf;
}

CsvTable transmission_table(const Scenario& s) {
    CsvTable t({"k", "TkRe", "TkIm", "RkRe", "RkIm", "absA2"});
    for (double k : s.k_grid->points()) {
        const auto sd = piecewise_amplitudes(s.profile, k, s.composition);
        t.add_row({k, sd.T.real(), sd.T.imag(), sd.R.real(), sd.R.imag(), std::norm(sd.A)});
    }
    return t;
}

CsvTable tunneling_table(const Scenario& s, double V0) {
    CsvTable t({"p", "tau"});
    const double d = s.profile.segments.front().w, m = s.profile.mass;
    const auto prof = square_barrier(V0, d, m);
    const double pmax = tunneling_momentum_limit(V0, m);
    const auto& g = s.tunneling;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double f = g.f_lo + (g.f_hi - g.f_lo) * double(i) / double(g.n - 1);
        const double p = f * pmax;
        t.add_row({p, tunneling_time(p, prof)});
    }
    return t;
}

std::pair<double, double> resonance_range(const Scenario& s) {
    if (s.resonance_window) return *s.resonance_window;
    if (s.packet) return s.packet->window();
    const double kmax = tunneling_momentum_limit(s.double_barrier->V0, s.profile.mass);
    return {1e-6 * kmax, (1 - 1e-9) * kmax};
}

CsvTable resonance_table(const Scenario& s, Warnings* w) {
    CsvTable t({"n", "k_n", "absT"});
    const auto& db = *s.double_barrier;
    const auto [lo, hi] = resonance_range(s);
    const auto ks = find_resonances(db.V0, db.a, db.r, db.m, lo, hi, w);
    if (ks.empty()) warn(w, "resonance scan: no resonances in [" + format_double(lo) + ", " + format_double(hi) + "]");
    long long n = 0;
    for (double k : ks) t.add_row({n++, k, piecewise_amplitudes(s.profile, k, s.composition).abs_T});
    return t;
}

struct Extraction {
    double t0 = std::numeric_limits<double>::quiet_NaN();
    double dt = std::numeric_limits<double>::quiet_NaN();
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double r2 = std::numeric_limits<double>::quiet_NaN();
};

// First peak, mean peak spacing and decay rate of a density. Without a
// configured window the rate comes from the peak envelope when there are at
// least three peaks, otherwise from the raw samples of the second half.
Extraction extract(const ArrivalDistribution& d, const Scenario& s, const std::string& label, Warnings* w) {
    Extraction e;
    const auto peaks = detect_peaks(d);
    if (!peaks.empty()) e.t0 = peaks.front().t;
    if (peaks.size() >= 2) e.dt = (peaks.back().t - peaks.front().t) / double(peaks.size() - 1);
    FitWindow window = s.fit_window;
    FitMode mode = s.fit_mode;
    const bool configured = std::isfinite(window.t_lo) || std::isfinite(window.t_hi);
    if (!configured) {
        if (peaks.size() >= 3) {
            mode = FitMode::peaks;
        } else {
            mode = FitMode::raw;
            window.t_lo = 0.5 * (d.grid.t_start + d.grid.t_end);
        }
    }
    try {
        const auto f = fit_exponential(d, window, mode);
        e.gamma = f.rate;
        e.r2 = f.r2;
        if (f.poor) warn(w, label + ": exponential fit is poor (R^2 = " + format_double(f.r2) + ")");
    } catch (const std::invalid_argument& ex) {
        warn(w, label + ": no decay rate extracted (" + ex.what() + ")");
    }
    return e;
}

double relative_difference(double model, double direct) {
    return direct != 0 ? (model - direct) / direct : std::numeric_limits<double>::quiet_NaN();
}

} // namespace

RegimeComparison compare_regimes(const Scenario& s, Warnings* warnings, unsigned threads) {
    if (!s.double_barrier || !s.packet || !s.detector || !s.time_grid)
        throw ConfigError("task", "regime comparison needs a double barrier, packet, detector and time grid");
    const auto& db = *s.double_barrier;
    const auto& pk = *s.packet;
    const double L = s.detector->L;
    const auto& grid = *s.time_grid;

    const auto direct = arrival_density(grid, pk, s.profile, *s.detector, arrival_options(s, threads, warnings));
    std::vector<std::pair<std::string, ArrivalDistribution>> models;
    if (pk.shape == PacketShape::gaussian) {
        models.emplace_back("peak_series", peak_series_density(grid, pk, L, db, 0, warnings));
        models.emplace_back("continuum", continuum_density(grid, pk, L, db, warnings));
    } else {
        const auto [lo, hi] = pk.window();
        const auto ks = find_resonances(db.V0, db.a, db.r, db.m, lo, hi, warnings);
        if (ks.empty()) {
            warn(warnings, "regime comparison: no resonance inside the packet window, resonance formulas skipped");
        } else {
            double nearest = ks.front();
            std::vector<Resonance> inside;
            for (double k : ks) {
                if (std::abs(k - pk.p) < std::abs(nearest - pk.p)) nearest = k;
                if (std::abs(k - pk.p) <= pk.sigma) inside.push_back(resonance_at(k, db, warnings));
            }
            models.emplace_back("resonance",
                                resonance_density(grid, pk, L, db, resonance_at(nearest, db, warnings), false, warnings));
            if (inside.size() >= 2)
                models.emplace_back("multi_resonance", multi_resonance_density(grid, pk, L, db, inside, warnings));
        }
    }

    std::vector<std::string> cols{"t", "P_direct"};
    for (const auto& [name, d] : models) {
        cols.push_back("P_" + name);
        cols.push_back("rel_" + name);
    }
    RegimeComparison out;
    out.pointwise = CsvTable(cols);
    for (std::size_t i = 0; i < grid.n; ++i) {
        std::vector<CsvTable::Cell> row{direct.t[i], direct.P[i]};
        for (const auto& m : models) {
            row.emplace_back(m.second.P[i]);
            row.emplace_back(relative_difference(m.second.P[i], direct.P[i]));
        }
        out.pointwise.add_row(std::move(row));
    }

    out.summary = CsvTable({"source", "t0", "dt", "gamma", "r2"});
    const auto o = double_barrier_observables(pk, L, db);
    const auto e = extract(direct, s, "direct", warnings);
    out.summary.add_row({std::string("direct"), e.t0, e.dt, e.gamma, e.r2});
    out.summary.add_row({std::string("formula"), o.t0, o.dt, o.gamma, std::numeric_limits<double>::quiet_NaN()});
    for (const auto& [name, d] : models) {
        const auto x = extract(d, s, name, warnings);
        out.summary.add_row({name, x.t0, x.dt, x.gamma, x.r2});
    }
    out.diagnostics = to_json(direct.diagnostics);
    return out;
}

RunResult run_scenario(const Scenario& s, const std::filesystem::path& out_dir, unsigned threads) {
    const auto start = std::chrono::steady_clock::now();
    RunResult res;
    res.warnings = s.warnings;
    Warnings* w = &res.warnings;
    json diagnostics = json::object();
    std::vector<std::pair<std::string, CsvTable>> tables;

    switch (s.task) {
    case Task::transmission_scan:
        tables.emplace_back(s.name + ".csv", transmission_table(s));
        break;
    case Task::tunneling_time_scan:
        for (double V0 : s.tunneling.V0) tables.emplace_back(s.name + "_V0_" + v0_label(V0) + ".csv", tunneling_table(s, V0));
        break;
    case Task::resonance_scan:
        tables.emplace_back(s.name + ".csv", resonance_table(s, w));
        break;
    case Task::arrival_density: {
        const auto d = arrival_density(*s.time_grid, *s.packet, s.profile, *s.detector, arrival_options(s, threads, w));
        CsvTable t({"t", "P"});
        for (std::size_t i = 0; i < d.t.size(); ++i) t.add_row({d.t[i], d.P[i]});
        tables.emplace_back(s.name + ".csv", std::move(t));
        diagnostics = to_json(d.diagnostics);
        diagnostics["mass"] = d.mass();
        break;
    }
    case Task::decay_fit: {
        const auto d = arrival_density(*s.time_grid, *s.packet, s.profile, *s.detector, arrival_options(s, threads, w));
        const auto e = extract(d, s, "decay fit", w);
        if (std::isnan(e.gamma)) throw NumericError("decay fit failed: no usable samples in the fit window");
        CsvTable t({"quantity", "value"});
        t.add_row({std::string("t0"), e.t0});
        t.add_row({std::string("dt"), e.dt});
        t.add_row({std::string("gamma_fit"), e.gamma});
        t.add_row({std::string("gamma_formula"), decay_rate(s.packet->p, *s.double_barrier, w)});
        t.add_row({std::string("r2"), e.r2});
        tables.emplace_back(s.name + ".csv", std::move(t));
        diagnostics = to_json(d.diagnostics);
        break;
    }
    case Task::regime_compare: {
        auto cmp = compare_regimes(s, w, threads);
        tables.emplace_back(s.name + ".csv", std::move(cmp.pointwise));
        tables.emplace_back(s.name + "_summary.csv", std::move(cmp.summary));
        diagnostics = cmp.diagnostics;
        break;
    }
    }
    const double compute = seconds_since(start);

    json manifest;
    manifest["tunnelkit_version"] = kVersion;
    manifest["scenario"] = s.name;
    manifest["task"] = to_string(s.task);
    manifest["config"] = s.config;
    json resolved{{"profile", to_json(s.profile)}, {"rel_tol", s.rel_tol},
                  {"composition", s.composition == Composition::scaled ? "scaled" : "direct"}};
    if (s.packet) resolved["packet"] = to_json(*s.packet);
    if (s.detector) resolved["detector"] = to_json(*s.detector);
    if (s.time_grid) resolved["time_grid"] = {{"t_start", s.time_grid->t_start}, {"t_end", s.time_grid->t_end}, {"n", s.time_grid->n}};
    if (s.task == Task::tunneling_time_scan) resolved["tunneling_scan"] = {{"V0", s.tunneling.V0}, {"n", s.tunneling.n},
                                                                         {"p_fraction", {s.tunneling.f_lo, s.tunneling.f_hi}}};
    manifest["resolved"] = resolved;
    if (s.double_barrier && s.packet && s.packet->p < tunneling_momentum_limit(s.double_barrier->V0, s.profile.mass))
        manifest["report"] = to_json(regime_report(*s.packet, s.detector ? s.detector->L : 10 * s.profile.extent(),
                                                   *s.double_barrier, w));
    manifest["diagnostics"] = diagnostics;

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    json outputs = json::array();
    for (const auto& [file, table] : tables) {
        write_csv(out_dir / file, table);
        res.outputs.push_back(out_dir / file);
        outputs.push_back(file);
    }
    Warnings unique;
    for (const auto& msg : res.warnings)
        if (std::find(unique.begin(), unique.end(), msg) == unique.end()) unique.push_back(msg);
    res.warnings = unique;
    const auto manifest_file = s.name + "_manifest.json";
    outputs.push_back(manifest_file);
    manifest["outputs"] = outputs;
    manifest["warnings"] = res.warnings;
    manifest["timings_s"] = {{"compute", compute}, {"total", seconds_since(start)}};
    write_json(out_dir / manifest_file, manifest);
    res.outputs.push_back(out_dir / manifest_file);
    res.manifest = manifest;
    return res;
}

} // namespace tunnelkit
