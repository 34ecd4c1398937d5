#pragma once

#include "tunnelkit/error.hpp"
#include "tunnelkit/profile.hpp"
#include "tunnelkit/wavepacket.hpp"

#include "json.hpp"

#include <limits>
#include <vector>

namespace tunnelkit {

// Stationary-phase delay (1/v) d arg A/dk at k = p, Richardson-extrapolated
// central differences with h = 1e-5 p. A recognized symmetric double barrier
// reports twice the delay of one of its barriers (the first-peak delay);
// phase_delay() always differentiates the full profile.
double delay_time(double p, const PotentialProfile& profile);
double phase_delay(double p, const PotentialProfile& profile);

// delay_time + d/v with d the total extent.
double tunneling_time(double p, const PotentialProfile& profile);

// Analytic derivative of the square-barrier transmission phase, plus d/v.
double tunneling_time_closed(double p, double V0, double d, double m);
// d -> infinity limit of the above.
double tunneling_time_opaque(double p, double V0, double m);

// Momenta in [k_lo, k_hi] where the double-barrier transmission reaches one:
// k (r + a) + phi0(k) = pi/2 mod pi, phi0 the single-barrier phase. Roots
// failing |T| > 1 - 1e-6 are dropped with a warning.
std::vector<double> find_resonances(double V0, double a, double r, double m, double k_lo, double k_hi,
                                    Warnings* warnings = nullptr);

// |T0|^2 / (r/v + tau) for the single barrier of width a.
double decay_rate(double p, const DoubleBarrier& db, Warnings* warnings = nullptr);

struct DoubleBarrierObservables {
    double v = 0;
    double tau = 0;       // single-barrier tunneling time
    double phi0 = 0;      // single-barrier transmission phase at p
    double phi0_prime = 0;
    double abs_T0_sq = 0;
    double t0 = 0;        // first peak
    double dt = 0;        // peak spacing
    double gamma = 0;
    double beta = 0;      // reduced to (-pi, pi]
    double mu = 0;
};

DoubleBarrierObservables double_barrier_observables(const WavePacketSpec& spec, double L, const DoubleBarrier& db,
                                                    Warnings* warnings = nullptr);

// Sum of transmitted copies of the incoming packet, one per round trip,
// truncated where |R0|^(2n) < 1e-8 unless n_max > 0.
ArrivalDistribution peak_series_density(const TimeGrid& grid, const WavePacketSpec& spec, double L,
                                        const DoubleBarrier& db, int n_max = 0, Warnings* warnings = nullptr);

// Smooth Gaussian-packet limit of the peak series (sum replaced by an integral).
ArrivalDistribution continuum_density(const TimeGrid& grid, const WavePacketSpec& spec, double L,
                                      const DoubleBarrier& db, Warnings* warnings = nullptr);

struct Resonance {
    double k = 0;
    double gamma = 0; // decay rate in time
};

Resonance resonance_at(double k0, const DoubleBarrier& db, Warnings* warnings = nullptr);

// Lorentzian packet against a single Lorentzian transmission line. exact
// selects the k0 = p closed form.
ArrivalDistribution resonance_density(const TimeGrid& grid, const WavePacketSpec& spec, double L,
                                      const DoubleBarrier& db, const Resonance& res, bool exact = false,
                                      Warnings* warnings = nullptr);

ArrivalDistribution multi_resonance_density(const TimeGrid& grid, const WavePacketSpec& spec, double L,
                                            const DoubleBarrier& db, const std::vector<Resonance>& res,
                                            Warnings* warnings = nullptr);

// T_k = exp(2 i phi0(k)) sum_n 1/(1 - i (2 v_n/Gamma_n)(k - k_n)): the
// transmission the resonance formulas assume, for direct-quadrature checks.
AmplitudeModel lorentzian_model(const DoubleBarrier& db, const std::vector<Resonance>& res);

struct RegimeReport {
    double p = 0;
    double v = 0;
    double t_d = 0;
    double tau = 0;
    double t0 = 0;
    double dt = 0;
    double gamma = 0;
    double beta = 0;
    double mu = 0;
    double abs_T0_sq = 0;
    double abs_Tp_sq = 0;           // packet-averaged transmission probability
    double abs_Tp_sq_pointwise = 0; // |T(p)|^2
    double sigma_v_dt = 0;
    std::vector<double> resonances;
    bool has_fit = false;
    double fit_rate = 0;
    double fit_r2 = 0;
    double fit_t_lo = 0;
    double fit_t_hi = 0;
};

RegimeReport regime_report(const WavePacketSpec& spec, double L, const DoubleBarrier& db,
                           Warnings* warnings = nullptr);

// 0 before t0, |T_p|^2 Gamma exp(-Gamma (t - t0)) after.
double envelope_density(double t, const RegimeReport& report);

enum class FitMode { raw, peaks };

struct FitWindow {
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
};

struct ExponentialFit {
    double rate = 0;
    double intercept = 0; // log density at t = 0
    double r2 = 0;
    std::size_t samples = 0;
    bool poor = false;       // r2 < 0.9
    bool degenerate = false; // no variance in log density
};

ExponentialFit fit_exponential(const ArrivalDistribution& dist, const FitWindow& window, FitMode mode);

struct Peak {
    double t = 0;
    double height = 0;
};

// Local maxima above 1e-6 of the global maximum, refined by a parabola through
// the three samples around each.
std::vector<Peak> detect_peaks(const ArrivalDistribution& dist);

// Fraction of the sampled mass with t < L + x0 - slack (c = 1).
double causality_mass(const ArrivalDistribution& dist, double L, double x0, double slack);

nlohmann::json to_json(const RegimeReport& r);
nlohmann::json to_json(const ExponentialFit& f);

} // namespace tunnelkit
