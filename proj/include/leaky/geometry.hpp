#pragma once

// Periodic profile curves, compactly supported deformations, and the derived
// geometric quantities consumed by the integral kernels.

#include <cmath>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace leaky {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double norm(Vec2 v);

// ---- periodic profile gamma ------------------------------------------------

struct FlatProfile {};

/// gamma(x) = amplitude * sin(2 pi x / a)
struct SineProfile {
    double amplitude = 0.0;
};

/// One bump per period, centred at the lattice points m*a:
/// gamma(x) = amplitude * (1 - (x/w)^2)^(order+1) for |x - m a| < w, else 0.
/// The profile is C^order; straight segments separate the bumps.
struct BumpTrainProfile {
    double amplitude = 0.0;
    double half_width = 0.0;
    int order = 6;
};

using Profile = std::variant<FlatProfile, SineProfile, BumpTrainProfile>;

// ---- deformation tau -------------------------------------------------------

/// tau decreases smoothly (quintic smoothstep) from 0 at x = -L to -depth at x = L.
struct SmoothContraction {
    double depth = 0.0;
    double half_width = 0.0;
};

/// tau(x) = amplitude * t^3 (1 - t^2)^3 with t = x / L on |x| < L: odd, C^2,
/// tau'(0) = 0, compactly supported so that the integral of tau' vanishes.
struct ZeroMeanWiggle {
    double amplitude = 0.0;
    double half_width = 0.0;
};

struct ShiftStep {
    double lo = 0.0;
    double hi = 0.0;
    double shift = 0.0;
};

/// Piecewise constant tau: tau(x) = shift on [lo, hi). Not Lipschitz; used only
/// to displace whole curved segments along straight parts of the curve.
struct StepShifts {
    std::vector<ShiftStep> steps;
};

using DeformationTerm = std::variant<SmoothContraction, ZeroMeanWiggle, StepShifts>;

/// tau is a finite sum of terms; no terms means tau = 0.
struct Deformation {
    std::vector<DeformationTerm> terms;

    bool is_zero() const { return terms.empty(); }
    bool has_steps() const;
};

struct CurveSpec {
    double period_a = 1.0;
    Profile gamma = FlatProfile{};
    Deformation tau;
    /// When set, the curve is the scaled family x -> (x + eps tau(x), eps gamma(x)).
    std::optional<double> epsilon_scale;

    double eps() const { return epsilon_scale.value_or(1.0); }
    /// Same curve with tau removed.
    CurveSpec unperturbed() const;
};

/// Throws ModelError unless the curve satisfies its invariants
/// (positive period, bump narrower than half a period, order-preserving tau, ...).
void validate(const CurveSpec& spec);

namespace geometry {

double gamma(const CurveSpec& spec, double x1);
double gamma_d1(const CurveSpec& spec, double x1);
double gamma_d2(const CurveSpec& spec, double x1);
double tau(const CurveSpec& spec, double x1);
double tau_d1(const CurveSpec& spec, double x1);
double tau_d2(const CurveSpec& spec, double x1);

/// True when gamma has two continuous derivatives.
bool profile_is_c2(const Profile& profile);
bool profile_is_flat(const Profile& profile);

/// Closed interval outside which tau' vanishes; nullopt for tau = 0.
std::optional<std::pair<double, double>> tau_support(const CurveSpec& spec);

Vec2 point(const CurveSpec& spec, double x1);
double euclid_dist(const CurveSpec& spec, double x1, double x1p);
/// |d point / d x1| = sqrt((1 + eps tau')^2 + (eps gamma')^2).
double arc_element(const CurveSpec& spec, double x1);
/// sqrt(arc_element): the symmetric weight of the unitary change of variables.
double metric_weight(const CurveSpec& spec, double x1);

/// -k(x1)^2 / 4 with k the signed curvature of the (scaled, deformed) curve.
/// Throws ModelError for profiles without two derivatives.
double curvature_potential(const CurveSpec& spec, double x1);

struct ConvexityMargin {
    /// 1/z + kappa K0(kz)/K1(kz) - z''/z'^2 with z = |point(x1)|.
    double margin = 0.0;
    /// Same without the Bessel-ratio term; positive iff z z'' < z'^2.
    double sufficient_margin = 0.0;
    /// First-order surrogate x^2 + 2 eps (tau + tau') as printed in the source.
    std::optional<double> surrogate_verbatim;
    /// Dimensionally consistent first-order expansion of z z'' < z'^2:
    /// x^2 + 2 eps (x tau + x^2 tau' - x^3 tau'' / 2).
    std::optional<double> surrogate_consistent;
};

/// Throws NumericalError where z = 0 or z' = 0.
ConvexityMargin convexity_margin(const CurveSpec& spec, double x1, double kappa);

/// Integral of tau' over the line: tau(+inf) - tau(-inf).
double tau_prime_integral(const CurveSpec& spec);

}  // namespace geometry

inline double norm(Vec2 v) {
    return std::hypot(v.x, v.y);
}

}  // namespace leaky
