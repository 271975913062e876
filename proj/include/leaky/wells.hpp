#pragma once

// One-dimensional arrays of non-overlapping potential wells.

#include <map>
#include <vector>

namespace leaky {

enum class WellShape { square, smooth_bump, sampled };

/// Nonnegative well V supported in [-width/2, width/2].
struct WellProfile {
    WellShape shape = WellShape::square;
    double depth = 0.0;
    double width = 0.0;
    /// smooth_bump: V = depth * (1 - (2 xi / width)^2)^order.
    int order = 4;
    /// sampled: values on a uniform grid over the closed support, linearly interpolated.
    std::vector<double> samples;

    double value(double xi) const;
    double max_value() const;
    /// Interior points where V or its derivative jumps (square edges, sample nodes).
    std::vector<double> breakpoints() const;
};

/// Wells centred at n * spacing + shift(n); finitely many shifts are nonzero.
struct WellArray1D {
    double spacing = 1.0;
    WellProfile well;
    std::map<long, double> shifts;

    double shift(long n) const {
        const auto it = shifts.find(n);
        return it == shifts.end() ? 0.0 : it->second;
    }
    double center(long n) const { return static_cast<double>(n) * spacing + shift(n); }
    bool is_periodic() const;
    /// V_delta(x): sum of all shifted wells.
    double potential(double x) const;
    /// Same array with every shift removed.
    WellArray1D unshifted() const;
};

/// Throws ModelError when the support is wider than the spacing, V < 0, or
/// shifted neighbours come closer than spacing - width.
void validate(const WellArray1D& arr);

}  // namespace leaky
