#include "tunnelkit/kinematics.hpp"

#include "tunnelkit/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tunnelkit {

namespace {

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be finite");
}

void require_finite(std::complex<double> z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("complex error function argument must be finite");
}

constexpr double kSqrtPi = 1.7724538509055160273;

// Maclaurin series of erf. Relative error of erfc is roughly eps*exp(2 x^2)*|z|,
// acceptable only while Re z stays small.
std::complex<double> erf_series(std::complex<double> z) {
    const std::complex<double> z2 = z * z;
    std::complex<double> term = z;
    std::complex<double> sum = z;
    const double nmin = std::norm(z);
    for (int n = 1; n < 5000; ++n) {
        term *= -z2 / double(n);
        const std::complex<double> add = term / double(2 * n + 1);
        sum += add;
        if (n > nmin && std::abs(add) <= 1e-17 * std::abs(sum)) break;
    }
    return sum * (2.0 / kSqrtPi);
}

// Laplace continued fraction for exp(z^2) erfc(z), Re z >= 0:
// sqrt(pi) exp(z^2) erfc(z) = 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))).
// Modified Lentz evaluation.
std::complex<double> erfcx_fraction(std::complex<double> z) {
    const double tiny = 1e-300;
    std::complex<double> f = z;
    if (f == 0.0) f = tiny;
    std::complex<double> C = f;
    std::complex<double> D = 0.0;
    for (int n = 1; n < 20000; ++n) {
        const double a = 0.5 * n;
        D = z + a * D;
        if (D == 0.0) D = tiny;
        C = z + a / C;
        if (C == 0.0) C = tiny;
        D = 1.0 / D;
        const std::complex<double> delta = C * D;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) return 1.0 / (kSqrtPi * f);
    }
    throw NumericError("erfc continued fraction did not converge");
}

bool use_series(std::complex<double> z) {
    return z.real() < 2.0 && std::abs(z) < 24.0;
}

// erfcx for Re z >= 0.
std::complex<double> erfcx_right(std::complex<double> z) {
    if (use_series(z)) return std::exp(z * z) * (1.0 - erf_series(z));
    return erfcx_fraction(z);
}

} // namespace

Kinematics relativistic_kinematics(double k, double m) {
    require_finite(k, "momentum");
    require_finite(m, "mass");
    if (m <= 0) throw std::invalid_argument("mass must be positive");
    const double E = std::hypot(k, m);
    return {k, E, k / E};
}

double evanescent_scale(double E, double V0, double m) {
    require_finite(E, "energy");
    require_finite(V0, "potential");
    if (m <= 0) throw std::invalid_argument("mass must be positive");
    const double u = E - V0;
    if (std::abs(u) > m) throw std::domain_error("propagating segment: |E - V0| > m");
    // factored form keeps the result accurate near |E - V0| = m
    return std::sqrt((m - u) * (m + u));
}

double matching_weight(double kappa_sq, double m) {
    require_finite(kappa_sq, "squared wavenumber");
    if (m <= 0) throw std::invalid_argument("mass must be positive");
    if (kappa_sq < -m * m) throw std::domain_error("evanescent scale exceeds the mass");
    // rationalized: no 0/0 at kappa_sq = 0, so no separate Taylor branch is needed
    return 1.0 / (m + std::sqrt(m * m + kappa_sq));
}

std::complex<double> erfc_complex(std::complex<double> z) {
    require_finite(z);
    if (z.real() < 0) return 2.0 - erfc_complex(-z);
    if (use_series(z)) return 1.0 - erf_series(z);
    return std::exp(-z * z) * erfcx_fraction(z);
}

std::complex<double> erfcx_complex(std::complex<double> z) {
    require_finite(z);
    if (z.real() < 0) return 2.0 * std::exp(z * z) - erfcx_right(-z);
    return erfcx_right(z);
}

std::complex<double> faddeeva_w(std::complex<double> z) {
    require_finite(z);
    const std::complex<double> iz(-z.imag(), z.real());
    if (z.imag() < 0) return 2.0 * std::exp(-z * z) - erfcx_right(iz);
    return erfcx_right(-iz);
}

} // namespace tunnelkit
