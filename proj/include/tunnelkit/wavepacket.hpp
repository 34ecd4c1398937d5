#pragma once

#include "tunnelkit/error.hpp"
#include "tunnelkit/kinematics.hpp"
#include "tunnelkit/profile.hpp"

#include "json.hpp"

#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace tunnelkit {

enum class PacketShape { gaussian, lorentzian };

std::string to_string(PacketShape s);

// Initial state centred at -x0 with mean momentum p. Momentum profiles are
// normalized so that the integral of |u(k)|^2 dk/(2 pi) is one.
struct WavePacketSpec {
    PacketShape shape = PacketShape::gaussian;
    double p = 0;
    double sigma = 0; // momentum spread
    double x0 = 0;

    double sigma_x() const; // position spread, 1/(2 sigma) for the Gaussian
    // Momentum support used by every quadrature: p -/+ 8 sigma (Gaussian) or
    // 80 sigma (Lorentzian), truncated just above k = 0.
    std::pair<double, double> window() const;
    void validate() const; // ConfigError with paths "p", "sigma", "x0"
};

// u(q) with q = k - p, real.
double packet_envelope(const WavePacketSpec& spec, double q);
// u(k - p) exp(i k x0)
cplx packet_momentum_amplitude(const WavePacketSpec& spec, double k);
// Position profile u0(x), the Fourier partner of packet_envelope.
double packet_position_envelope(const WavePacketSpec& spec, double x);

// Detector absorption coefficient alpha(k): a constant or a monotone cubic
// (Fritsch-Carlson) through tabulated samples, held flat outside the table.
class Absorption {
public:
    Absorption(double value = 1.0);
    Absorption(std::vector<double> k, std::vector<double> alpha);
    double operator()(double k) const;
    bool is_constant() const { return ks_.empty(); }
    double constant() const { return c_; }
    const std::vector<double>& ks() const { return ks_; }
    const std::vector<double>& values() const { return ys_; }

private:
    double c_ = 1;
    std::vector<double> ks_, ys_, slopes_;
};

struct DetectorSpec {
    double L = 0;
    Absorption alpha{1.0};
};

// L must clear the barrier and satisfy L >= 10 d; below 50 d a warning is raised.
void validate_detector(const DetectorSpec& det, double barrier_extent, Warnings* warnings);

struct TimeGrid {
    double t_start = 0;
    double t_end = 0;
    std::size_t n = 0;

    double step() const { return n > 1 ? (t_end - t_start) / double(n - 1) : 0.0; }
    double at(std::size_t i) const { return n > 1 ? t_start + (t_end - t_start) * double(i) / double(n - 1) : t_start; }
    std::vector<double> points() const;
    void validate() const; // ConfigError with paths "t_start", "t_end", "n"
};

struct QuadratureDiagnostics {
    std::size_t table_panels = 0;
    std::size_t table_evaluations = 0;
    double table_max_error = 0;
    std::size_t base_panels = 0;
    std::size_t integrand_evaluations = 0;
    std::size_t refined_panels = 0;
    double worst_relative_error = 0; // estimated error / L1 norm of the integrand
    double integrand_l1 = 0;
};

struct ArrivalDistribution {
    TimeGrid grid;
    std::vector<double> t;
    std::vector<double> P;
    std::vector<cplx> amplitude; // empty for closed-form regime densities
    QuadratureDiagnostics diagnostics;
    nlohmann::json metadata = nlohmann::json::object();

    double mass() const; // trapezoid integral of P
};

// Detection coefficient A_k as a black box, for model amplitudes.
struct AmplitudeModel {
    std::function<cplx(double)> A;
    double mass = 1;
    double extent = 0;              // barrier extent, for detector validation
    std::vector<double> hints;      // momenta of sharp features (resonances)
    std::string label = "model";
    // Absolute accuracy of A itself. Discrepancies below it are not refined away.
    double noise_floor = 0;
};

// A_k from transfer matrices; resonances of a recognized double barrier become hints.
AmplitudeModel profile_model(const PotentialProfile& profile);
// Resonance hints restricted to [k_lo, k_hi].
AmplitudeModel profile_model(const PotentialProfile& profile, double k_lo, double k_hi);

struct ArrivalOptions {
    double rel_tol = 1e-8;
    unsigned threads = 0; // 0: hardware concurrency
    Warnings* warnings = nullptr;
    int max_depth = 30;
};

cplx arrival_amplitude(double L, double t, const WavePacketSpec& spec, const PotentialProfile& profile,
                       const Absorption& alpha = {});

ArrivalDistribution arrival_density(const TimeGrid& grid, const WavePacketSpec& spec,
                                    const PotentialProfile& profile, const DetectorSpec& detector,
                                    const ArrivalOptions& opt = {});

ArrivalDistribution arrival_density(const TimeGrid& grid, const WavePacketSpec& spec,
                                    const AmplitudeModel& model, const DetectorSpec& detector,
                                    const ArrivalOptions& opt = {});

// Integral of alpha |A_k|^2 |u(k - p)|^2 dk/(2 pi) by direct momentum quadrature.
double total_transmission(const WavePacketSpec& spec, const PotentialProfile& profile,
                          const Absorption& alpha = {});
double total_transmission(const WavePacketSpec& spec, const AmplitudeModel& model, const Absorption& alpha = {});

nlohmann::json to_json(const WavePacketSpec& spec);
nlohmann::json to_json(const PotentialProfile& profile);
nlohmann::json to_json(const DetectorSpec& det);
nlohmann::json to_json(const QuadratureDiagnostics& d);

} // namespace tunnelkit
