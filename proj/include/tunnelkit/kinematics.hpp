#pragma once

#include <complex>

namespace tunnelkit {

using cplx = std::complex<double>;

struct Kinematics {
    double k = 0;
    double E = 0;
    double v = 0;
};

// E = sqrt(k^2 + m^2), v = k/E. Natural units, everything in powers of m.
Kinematics relativistic_kinematics(double k, double m);

// lambda = sqrt(m^2 - (E - V0)^2); throws std::domain_error when |E - V0| > m
// (propagating segment).
double evanescent_scale(double E, double V0, double m);

// Junction weight F multiplying g' at a discontinuity, as a function of the
// signed squared local wavenumber (negative inside evanescent segments).
// F = (sqrt(m^2 + kappa_sq) - m)/kappa_sq = 1/(m + sqrt(m^2 + kappa_sq)).
double matching_weight(double kappa_sq, double m);

std::complex<double> erfc_complex(std::complex<double> z);

// Scaled complement exp(z^2) erfc(z); finite for Re z >= 0 at any |z|.
std::complex<double> erfcx_complex(std::complex<double> z);

// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
std::complex<double> faddeeva_w(std::complex<double> z);

} // namespace tunnelkit
