#pragma once

#include <optional>
#include <vector>

namespace tunnelkit {

struct Segment {
    double v = 0; // potential height
    double w = 0; // width
};

// Piecewise-constant potential occupying [-d/2, d/2], free on both sides.
struct PotentialProfile {
    double mass = 1;
    std::vector<Segment> segments;

    double extent() const;
    bool mirror_symmetric(double tol = 0) const;
    // Throws ConfigError with a path relative to the profile object,
    // e.g. "segments[2].v".
    void validate() const;
};

PotentialProfile square_barrier(double V0, double d, double m = 1);
PotentialProfile double_barrier(double V0, double a, double r, double m = 1);

struct DoubleBarrier {
    double V0 = 0;
    double a = 0; // width of each barrier
    double r = 0; // gap between them
    double m = 1;
    PotentialProfile profile() const { return double_barrier(V0, a, r, m); }
};

// Recognizes (V0, a), (0, r), (V0, a) with V0 > 0; r = 0 is not a double barrier.
std::optional<DoubleBarrier> as_double_barrier(const PotentialProfile& p);

} // namespace tunnelkit
