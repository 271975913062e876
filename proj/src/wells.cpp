#include "leaky/wells.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "leaky/errors.hpp"

namespace leaky {

double WellProfile::value(double xi) const {
    const double half = 0.5 * width;
    if (std::abs(xi) > half) {
        return 0.0;
    }
    switch (shape) {
        case WellShape::square:
            return depth;
        case WellShape::smooth_bump: {
            const double t = xi / half;
            return depth * std::pow(1.0 - t * t, order);
        }
        case WellShape::sampled: {
            const double pos = (xi + half) / width * static_cast<double>(samples.size() - 1);
            const auto i = std::min(static_cast<std::size_t>(pos), samples.size() - 2);
            const double f = pos - static_cast<double>(i);
            return (1.0 - f) * samples[i] + f * samples[i + 1];
        }
    }
    return 0.0;
}

double WellProfile::max_value() const {
    if (shape == WellShape::sampled) {
        return samples.empty() ? 0.0 : *std::max_element(samples.begin(), samples.end());
    }
    return depth;
}

std::vector<double> WellProfile::breakpoints() const {
    if (shape == WellShape::square) {
        return {-0.5 * width, 0.5 * width};
    }
    if (shape == WellShape::sampled && samples.size() > 2) {
        std::vector<double> knots;
        for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
            knots.push_back(-0.5 * width + width * static_cast<double>(i) / static_cast<double>(samples.size() - 1));
        }
        return knots;
    }
    return {};
}

bool WellArray1D::is_periodic() const {
    return std::all_of(shifts.begin(), shifts.end(), [](const auto& kv) { return kv.second == 0.0; });
}

double WellArray1D::potential(double x) const {
    const long n0 = std::lround(x / spacing);
    double v = 0.0;
    // Shifts are bounded by the ordering constraint, so neighbouring sites suffice
    // for unshifted wells; shifted wells are checked explicitly.
    for (long n = n0 - 1; n <= n0 + 1; ++n) {
        if (shifts.count(n) == 0) {
            v += well.value(x - center(n));
        }
    }
    for (const auto& [n, d] : shifts) {
        v += well.value(x - center(n));
    }
    return v;
}

WellArray1D WellArray1D::unshifted() const {
    WellArray1D copy = *this;
    copy.shifts.clear();
    return copy;
}

void validate(const WellArray1D& arr) {
    if (!(arr.spacing > 0.0)) {
        throw ModelError("well array: spacing must be positive");
    }
    const WellProfile& w = arr.well;
    if (!(w.width > 0.0) || !(w.width < arr.spacing)) {
        throw ModelError("well array: well width b must satisfy 0 < b < a");
    }
    if (w.shape == WellShape::sampled) {
        if (w.samples.size() < 2) {
            throw ModelError("well array: sampled profile needs at least two samples");
        }
        for (double v : w.samples) {
            if (!(v >= 0.0)) {
                throw ModelError("well array: potential must be nonnegative");
            }
        }
    } else if (!(w.depth >= 0.0)) {
        throw ModelError("well array: depth must be nonnegative");
    }
    if (arr.shifts.empty()) {
        return;
    }
    const long lo = arr.shifts.begin()->first - 1;
    const long hi = arr.shifts.rbegin()->first + 1;
    for (long n = lo; n < hi; ++n) {
        if (!(arr.shift(n + 1) - arr.shift(n) > -w.width)) {
            throw ModelError("well array: shifts violate x_{n+1} - x_n > a - b between sites " +
                             std::to_string(n) + " and " + std::to_string(n + 1));
        }
        if (!(arr.center(n + 1) - arr.center(n) > w.width)) {
            throw ModelError("well array: shifted wells overlap between sites " + std::to_string(n) +
                             " and " + std::to_string(n + 1));
        }
    }
}

}  // namespace leaky
