#include "tunnelkit/profile.hpp"

#include "tunnelkit/error.hpp"

#include <cmath>
#include <string>

namespace tunnelkit {

double PotentialProfile::extent() const {
    double d = 0;
    for (const auto& s : segments) d += s.w;
    return d;
}

bool PotentialProfile::mirror_symmetric(double tol) const {
    const std::size_t n = segments.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
        const auto& a = segments[i];
        const auto& b = segments[n - 1 - i];
        if (std::abs(a.v - b.v) > tol || std::abs(a.w - b.w) > tol) return false;
    }
    return true;
}

void PotentialProfile::validate() const {
    if (!(std::isfinite(mass) && mass > 0)) throw ConfigError("mass", "must be a positive number");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const std::string at = "segments[" + std::to_string(i) + "]";
        const auto& s = segments[i];
        if (!(std::isfinite(s.w) && s.w > 0)) throw ConfigError(at + ".w", "width must be positive");
        if (!std::isfinite(s.v) || s.v < 0) throw ConfigError(at + ".v", "height must be non-negative");
        if (s.v >= mass)
            throw ConfigError(at + ".v", "height must stay below the mass (background-field validity)");
    }
}

PotentialProfile square_barrier(double V0, double d, double m) {
    return {m, {{V0, d}}};
}

PotentialProfile double_barrier(double V0, double a, double r, double m) {
    if (r == 0) return {m, {{V0, 2 * a}}};
    return {m, {{V0, a}, {0, r}, {V0, a}}};
}

std::optional<DoubleBarrier> as_double_barrier(const PotentialProfile& p) {
    if (p.segments.size() != 3) return std::nullopt;
    const auto& s = p.segments;
    if (s[0].v <= 0 || s[1].v != 0 || s[0].v != s[2].v || s[0].w != s[2].w) return std::nullopt;
    return DoubleBarrier{s[0].v, s[0].w, s[1].w, p.mass};
}

} // namespace tunnelkit
