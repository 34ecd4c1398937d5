#pragma once

#include "tunnelkit/kinematics.hpp"
#include "tunnelkit/profile.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace tunnelkit {

// Amplitudes at one momentum. Opaque barriers underflow T, so the transmitted
// quantities are also kept scaled: T = T_scaled * exp(-log_scale).
struct ScatteringData {
    double k = 0;
    cplx T{1, 0};
    cplx R{0, 0};
    double w = 0; // Re(conj(T) R)
    cplx A{1, 0}; // detection coefficient
    cplx T_scaled{1, 0};
    cplx A_scaled{1, 0};
    double log_scale = 0;
    double abs_T = 1;
    double log_abs_T = 0;
    double phi = 0; // arg T, principal branch
    double chi = 0; // arg(i R conj T)
};

struct BarrierFunctions {
    double e = 1;
    double eta = 0;
    double rho = 1;
    double lambda = 0;
};

// Upper edge of the tunneling window, sqrt((m + V0)^2 - m^2).
double tunneling_momentum_limit(double V0, double m);

BarrierFunctions barrier_functions(double k, double V0, double m);

ScatteringData square_barrier_amplitudes(double k, double V0, double d, double m);

// Closed-form double barrier T; R follows from the multiple-reflection sum.
ScatteringData double_barrier_T(double k, double V0, double a, double r, double m);

// T0^2 / (1 - R0^2 exp(2ik(r+a))) with single-barrier amplitudes of width a.
cplx double_barrier_T_composed(double k, double V0, double a, double r, double m);

enum class Composition { scaled, direct };

ScatteringData piecewise_amplitudes(const PotentialProfile& profile, double k,
                                    Composition mode = Composition::scaled);

struct Detection {
    double w = 0;
    cplx A{1, 0};
};
Detection detection_coefficient(cplx T, cplx R);

struct PhaseSplit {
    double abs_T = 1;
    double phi = 0;
    double chi = 0;
};
PhaseSplit phase_split(cplx T, cplx R);

// Continuous branch of arg f(k) along increasing ks. Intervals whose phase
// step exceeds pi/2 are bisected (up to max_halvings) before the nearest
// 2*pi branch is chosen; throws NumericError if a step never resolves.
std::vector<double> unwrap_phase(const std::function<cplx(double)>& f, const std::vector<double>& ks,
                                 int max_halvings = 20);

// Nearest-branch continuation of an already sampled phase sequence.
std::vector<double> unwrap_sequence(const std::vector<double>& phases);

} // namespace tunnelkit
