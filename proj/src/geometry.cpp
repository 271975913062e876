#include "leaky/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "leaky/errors.hpp"
#include "leaky/overloaded.hpp"
#include "leaky/specfun.hpp"

namespace leaky {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Local coordinate of x inside its period cell [-a/2, a/2).
double cell_offset(double x, double a) {
    return x - a * std::floor(x / a + 0.5);
}

// Derivatives 0..2 of the profile at x.
struct Jet {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

Jet profile_jet(const Profile& profile, double a, double x) {
    return std::visit(
        Overloaded{
            [](const FlatProfile&) { return Jet{}; },
            [&](const SineProfile& s) {
                const double k = kTwoPi / a;
                return Jet{s.amplitude * std::sin(k * x), s.amplitude * k * std::cos(k * x),
                           -s.amplitude * k * k * std::sin(k * x)};
            },
            [&](const BumpTrainProfile& b) {
                const double t = cell_offset(x, a) / b.half_width;
                if (std::abs(t) >= 1.0) {
                    return Jet{};
                }
                const int p = b.order;
                const double q = 1.0 - t * t;
                const double qp = std::pow(q, p);
                const double qpm = p >= 1 ? std::pow(q, p - 1) : 0.0;
                const double w = b.half_width;
                Jet j;
                j.v = b.amplitude * qp * q;
                j.d1 = b.amplitude * (-2.0 * (p + 1) * t * qp) / w;
                j.d2 = b.amplitude * (-2.0 * (p + 1) * qp + 4.0 * p * (p + 1) * t * t * qpm) / (w * w);
                return j;
            },
        },
        profile);
}

Jet term_jet(const DeformationTerm& term, double x) {
    return std::visit(
        Overloaded{
            [&](const SmoothContraction& c) {
                const double l = c.half_width;
                const double t = (x + l) / (2.0 * l);
                if (t <= 0.0) {
                    return Jet{};
                }
                if (t >= 1.0) {
                    return Jet{-c.depth, 0.0, 0.0};
                }
                const double s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
                const double s1 = 30.0 * t * t * (1.0 - t) * (1.0 - t);
                const double s2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
                return Jet{-c.depth * s, -c.depth * s1 / (2.0 * l), -c.depth * s2 / (4.0 * l * l)};
            },
            [&](const ZeroMeanWiggle& w) {
                const double l = w.half_width;
                const double t = x / l;
                if (std::abs(t) >= 1.0) {
                    return Jet{};
                }
                const double t2 = t * t;
                const double v = t * t2 * (1.0 + t2 * (-3.0 + t2 * (3.0 - t2)));
                const double d1 = t2 * (3.0 + t2 * (-15.0 + t2 * (21.0 - 9.0 * t2)));
                const double d2 = t * (6.0 + t2 * (-60.0 + t2 * (126.0 - 72.0 * t2)));
                return Jet{w.amplitude * v, w.amplitude * d1 / l, w.amplitude * d2 / (l * l)};
            },
            [&](const StepShifts& s) {
                Jet j;
                for (const auto& step : s.steps) {
                    if (x >= step.lo && x < step.hi) {
                        j.v += step.shift;
                    }
                }
                return j;
            },
        },
        term);
}

Jet tau_jet(const Deformation& tau, double x) {
    Jet total;
    for (const auto& term : tau.terms) {
        const Jet j = term_jet(term, x);
        total.v += j.v;
        total.d1 += j.d1;
        total.d2 += j.d2;
    }
    return total;
}

std::pair<double, double> term_support(const DeformationTerm& term) {
    return std::visit(
        Overloaded{
            [](const SmoothContraction& c) { return std::pair{-c.half_width, c.half_width}; },
            [](const ZeroMeanWiggle& w) { return std::pair{-w.half_width, w.half_width}; },
            [](const StepShifts& s) {
                double lo = s.steps.front().lo;
                double hi = s.steps.front().hi;
                for (const auto& step : s.steps) {
                    lo = std::min(lo, step.lo);
                    hi = std::max(hi, step.hi);
                }
                return std::pair{lo, hi};
            },
        },
        term);
}

double z_of(const CurveSpec& spec, double x) {
    return norm(geometry::point(spec, x));
}

}  // namespace

bool Deformation::has_steps() const {
    return std::any_of(terms.begin(), terms.end(),
                       [](const DeformationTerm& t) { return std::holds_alternative<StepShifts>(t); });
}

CurveSpec CurveSpec::unperturbed() const {
    CurveSpec copy = *this;
    copy.tau = Deformation{};
    return copy;
}

void validate(const CurveSpec& spec) {
    if (!(spec.period_a > 0.0) || !std::isfinite(spec.period_a)) {
        throw ModelError("curve: period_a must be positive");
    }
    if (spec.epsilon_scale && !(*spec.epsilon_scale >= 0.0)) {
        throw ModelError("curve: epsilon_scale must be nonnegative");
    }
    std::visit(Overloaded{
                   [](const FlatProfile&) {},
                   [](const SineProfile& s) {
                       if (!std::isfinite(s.amplitude)) {
                           throw ModelError("curve: sine amplitude must be finite");
                       }
                   },
                   [&](const BumpTrainProfile& b) {
                       if (!(b.half_width > 0.0) || !(b.half_width < 0.5 * spec.period_a)) {
                           throw ModelError("curve: bump half-width must lie in (0, a/2)");
                       }
                       if (b.order < 1) {
                           throw ModelError("curve: bump smoothness order must be >= 1");
                       }
                   },
               },
               spec.gamma);
    for (const auto& term : spec.tau.terms) {
        std::visit(Overloaded{
                       [](const SmoothContraction& c) {
                           if (!(c.depth > 0.0) || !(c.half_width > 0.0)) {
                               throw ModelError("tau: smooth_contraction needs depth > 0 and half_width > 0");
                           }
                       },
                       [](const ZeroMeanWiggle& w) {
                           if (!(w.half_width > 0.0) || !std::isfinite(w.amplitude)) {
                               throw ModelError("tau: zero_mean_wiggle needs half_width > 0");
                           }
                       },
                       [](const StepShifts& s) {
                           if (s.steps.empty()) {
                               throw ModelError("tau: step_shifts needs at least one step");
                           }
                           for (const auto& step : s.steps) {
                               if (!(step.hi > step.lo)) {
                                   throw ModelError("tau: step interval must have hi > lo");
                               }
                           }
                       },
                   },
                   term);
    }
    if (auto support = geometry::tau_support(spec)) {
        // The map x -> x + eps tau(x) must stay increasing.
        const auto [lo, hi] = *support;
        const int samples = 4096;
        for (int i = 0; i <= samples; ++i) {
            const double x = lo + (hi - lo) * i / samples;
            if (!(1.0 + spec.eps() * geometry::tau_d1(spec, x) > 0.0)) {
                throw ModelError("tau: deformation does not preserve order (1 + tau' <= 0 at x1 = " +
                                 std::to_string(x) + ")");
            }
        }
    }
}

namespace geometry {

double gamma(const CurveSpec& spec, double x1) {
    return profile_jet(spec.gamma, spec.period_a, x1).v;
}
double gamma_d1(const CurveSpec& spec, double x1) {
    return profile_jet(spec.gamma, spec.period_a, x1).d1;
}
double gamma_d2(const CurveSpec& spec, double x1) {
    return profile_jet(spec.gamma, spec.period_a, x1).d2;
}
double tau(const CurveSpec& spec, double x1) {
    return tau_jet(spec.tau, x1).v;
}
double tau_d1(const CurveSpec& spec, double x1) {
    return tau_jet(spec.tau, x1).d1;
}
double tau_d2(const CurveSpec& spec, double x1) {
    return tau_jet(spec.tau, x1).d2;
}

bool profile_is_c2(const Profile& profile) {
    if (const auto* b = std::get_if<BumpTrainProfile>(&profile)) {
        return b->order >= 2;
    }
    return true;
}

bool profile_is_flat(const Profile& profile) {
    if (std::holds_alternative<FlatProfile>(profile)) {
        return true;
    }
    if (const auto* s = std::get_if<SineProfile>(&profile)) {
        return s->amplitude == 0.0;
    }
    return std::get<BumpTrainProfile>(profile).amplitude == 0.0;
}

std::optional<std::pair<double, double>> tau_support(const CurveSpec& spec) {
    if (spec.tau.is_zero()) {
        return std::nullopt;
    }
    auto hull = term_support(spec.tau.terms.front());
    for (const auto& term : spec.tau.terms) {
        const auto s = term_support(term);
        hull.first = std::min(hull.first, s.first);
        hull.second = std::max(hull.second, s.second);
    }
    return hull;
}

Vec2 point(const CurveSpec& spec, double x1) {
    const double eps = spec.eps();
    return {x1 + eps * tau(spec, x1), eps * gamma(spec, x1)};
}

double euclid_dist(const CurveSpec& spec, double x1, double x1p) {
    const Vec2 p = point(spec, x1);
    const Vec2 q = point(spec, x1p);
    return std::hypot(p.x - q.x, p.y - q.y);
}

double arc_element(const CurveSpec& spec, double x1) {
    const double eps = spec.eps();
    return std::hypot(1.0 + eps * tau_d1(spec, x1), eps * gamma_d1(spec, x1));
}

double metric_weight(const CurveSpec& spec, double x1) {
    return std::sqrt(arc_element(spec, x1));
}

double curvature_potential(const CurveSpec& spec, double x1) {
    if (!profile_is_c2(spec.gamma)) {
        throw ModelError("curvature_potential: profile is not C^2");
    }
    const double eps = spec.eps();
    const Jet g = profile_jet(spec.gamma, spec.period_a, x1);
    const Jet t = tau_jet(spec.tau, x1);
    const double dx = 1.0 + eps * t.d1;
    const double dy = eps * g.d1;
    const double ddx = eps * t.d2;
    const double ddy = eps * g.d2;
    const double speed2 = dx * dx + dy * dy;
    const double k = (dx * ddy - dy * ddx) / (speed2 * std::sqrt(speed2));
    return -0.25 * k * k;
}

ConvexityMargin convexity_margin(const CurveSpec& spec, double x1, double kappa) {
    if (!(kappa > 0.0)) {
        throw DomainError("convexity_margin: kappa must be positive");
    }
    const double h = 1e-4 * std::max(1.0, std::abs(x1));
    const double z = z_of(spec, x1);
    const double zp = z_of(spec, x1 + h);
    const double zm = z_of(spec, x1 - h);
    const double d1 = (zp - zm) / (2.0 * h);
    const double d2 = (zp - 2.0 * z + zm) / (h * h);
    if (!(z > 1e-12)) {
        throw NumericalError("convexity_margin: singular point z = 0 at x1 = " + std::to_string(x1));
    }
    if (!(std::abs(d1) > 1e-12)) {
        throw NumericalError("convexity_margin: singular point z' = 0 at x1 = " + std::to_string(x1));
    }
    ConvexityMargin out;
    const double curvature_term = d2 / (d1 * d1);
    out.sufficient_margin = 1.0 / z - curvature_term;
    out.margin = out.sufficient_margin + kappa * specfun::k_ratio(kappa * z);
    if (spec.epsilon_scale) {
        const double eps = *spec.epsilon_scale;
        const Jet t = tau_jet(spec.tau, x1);
        out.surrogate_verbatim = x1 * x1 + 2.0 * eps * (t.v + t.d1);
        out.surrogate_consistent =
            x1 * x1 + 2.0 * eps * (x1 * t.v + x1 * x1 * t.d1 - 0.5 * x1 * x1 * x1 * t.d2);
    }
    return out;
}

double tau_prime_integral(const CurveSpec& spec) {
    double total = 0.0;
    for (const auto& term : spec.tau.terms) {
        if (const auto* c = std::get_if<SmoothContraction>(&term)) {
            total -= c->depth;
        }
    }
    return total;
}

}  // namespace geometry
}  // namespace leaky
