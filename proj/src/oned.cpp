#include "leaky/oned.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "leaky/bsop.hpp"
#include "leaky/errors.hpp"
#include "leaky/format.hpp"
#include "leaky/numerics.hpp"
#include "leaky/spectral.hpp"

namespace leaky {
namespace {

using Mat2 = std::array<double, 4>;  // row-major

// 5-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 5> kGaussX{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                        0.9061798459386640};
constexpr std::array<double, 5> kGaussW{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                        0.4786286704993665, 0.2369268850561891};

template <class F>
double gauss5(F f, double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double r = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        s += kGaussW[k] * f(c + r * kGaussX[k]);
    }
    return s * r;
}

// Segment ends of one period: -a/2, well edges and breakpoints, a/2.
std::vector<double> period_knots(const WellArray1D& arr) {
    const double a = arr.spacing;
    const double b = arr.well.width;
    std::vector<double> k{-0.5 * a, 0.5 * a};
    if (b > 0.0) {
        k.push_back(-0.5 * b);
        k.push_back(0.5 * b);
        for (double x : arr.well.breakpoints()) {
            k.push_back(x);
        }
    }
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
}

Mat2 mul(const Mat2& p, const Mat2& q) {
    return {p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3], p[2] * q[0] + p[3] * q[2],
            p[2] * q[1] + p[3] * q[3]};
}

// One RK4 step of y' = A(x) y, A = [[0, 1], [-(V + E), 0]], as a 2x2 propagator.
Mat2 rk4_step(const WellProfile& well, double energy, double x, double h) {
    auto coef = [&](double t) {
        return -(well.value(t) + energy);
    };
    // One-sided values keep each step inside a smooth piece.
    const double q0 = coef(x + 1e-12 * h);
    const double qm = coef(x + 0.5 * h);
    const double q1 = coef(x + h - 1e-12 * h);
    Mat2 out{};
    for (int col = 0; col < 2; ++col) {
        const double y0 = col == 0 ? 1.0 : 0.0;
        const double v0 = col == 0 ? 0.0 : 1.0;
        const double k1y = v0, k1v = q0 * y0;
        const double k2y = v0 + 0.5 * h * k1v, k2v = qm * (y0 + 0.5 * h * k1y);
        const double k3y = v0 + 0.5 * h * k2v, k3v = qm * (y0 + 0.5 * h * k2y);
        const double k4y = v0 + h * k3v, k4v = q1 * (y0 + h * k3y);
        out[0 + col] = y0 + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        out[2 + col] = v0 + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    return out;
}

}  // namespace

Monodromy monodromy(const WellArray1D& arr, double energy, std::size_t steps_per_period) {
    if (steps_per_period < 4) {
        throw DomainError("monodromy: need at least 4 steps per period");
    }
    const double a = arr.spacing;
    const std::vector<double> knots = period_knots(arr);
    Mat2 m{1.0, 0.0, 0.0, 1.0};
    for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
        const double len = knots[s + 1] - knots[s];
        const auto steps = std::max<std::size_t>(
            4, static_cast<std::size_t>(std::llround(static_cast<double>(steps_per_period) * len / a)));
        const double h = len / static_cast<double>(steps);
        for (std::size_t k = 0; k < steps; ++k) {
            m = mul(rk4_step(arr.well, energy, knots[s] + static_cast<double>(k) * h, h), m);
        }
    }
    return {m[0] + m[3], m[0] * m[3] - m[1] * m[2]};
}

BandEdge band_bottom_1d(const WellArray1D& arr, std::size_t steps_per_period) {
    validate(arr);
    if (!arr.is_periodic()) {
        throw ModelError("band_bottom_1d: the array must be unshifted");
    }
    BandEdge edge;
    edge.steps_per_period = steps_per_period;
    const double vmax = arr.well.max_value();
    if (vmax == 0.0) {
        edge.eps0 = 0.0;
        edge.trace_at_edge = 2.0;
        edge.det_at_edge = 1.0;
        return edge;
    }
    auto f = [&](double e) { return monodromy(arr, e, steps_per_period).trace - 2.0; };
    double lo = -vmax;
    double f_lo = f(lo);
    if (!(f_lo > 0.0)) {
        throw NumericalError("band_bottom_1d: tr M(-max V) does not exceed 2");
    }
    const std::size_t scan = 400;
    for (std::size_t k = 1; k <= scan; ++k) {
        const double e = -vmax + vmax * static_cast<double>(k) / static_cast<double>(scan);
        const double fe = k == scan ? f(-1e-300) : f(e);
        if (fe <= 0.0) {
            edge.eps0 = brent_root(f, Bracket{lo, e, f_lo, fe}, 1e-15);
            const Monodromy m = monodromy(arr, edge.eps0, steps_per_period);
            edge.trace_at_edge = m.trace;
            edge.det_at_edge = m.det;
            return edge;
        }
        lo = e;
        f_lo = fe;
    }
    throw NumericalError("band_bottom_1d: no band edge in [-max V, 0)");
}

std::string discriminant_csv(const WellArray1D& arr, double e_lo, double e_hi, std::size_t count,
                             std::size_t steps_per_period) {
    std::ostringstream out;
    out << "E,trM\n";
    for (std::size_t k = 0; k < count; ++k) {
        const double e =
            count == 1 ? e_lo : e_lo + (e_hi - e_lo) * static_cast<double>(k) / static_cast<double>(count - 1);
        out << fmt_double(e) << ',' << fmt_double(monodromy(arr, e, steps_per_period).trace) << '\n';
    }
    return out.str();
}

double potential_average(const WellArray1D& arr, double lo, double hi) {
    const double a = arr.spacing;
    const double b = arr.well.width;
    double max_shift = 0.0;
    for (const auto& [n, d] : arr.shifts) {
        max_shift = std::max(max_shift, std::abs(d));
    }
    const auto n_lo = static_cast<long>(std::floor((lo - b - max_shift) / a)) - 1;
    const auto n_hi = static_cast<long>(std::ceil((hi + b + max_shift) / a)) + 1;
    std::vector<double> local_knots{-0.5 * b, 0.5 * b};
    for (double x : arr.well.breakpoints()) {
        local_knots.push_back(x);
    }
    std::sort(local_knots.begin(), local_knots.end());
    double total = 0.0;
    for (long n = n_lo; n <= n_hi; ++n) {
        const double c = arr.center(n);
        for (std::size_t k = 0; k + 1 < local_knots.size(); ++k) {
            const double p = std::max(lo, c + local_knots[k]);
            const double q = std::min(hi, c + local_knots[k + 1]);
            if (q > p) {
                total += gauss5([&](double x) { return arr.well.value(x - c); }, p, q);
            }
        }
    }
    return total / (hi - lo);
}

namespace {

double fd_lowest(const WellArray1D& arr, double half, double h, std::vector<double>* grid,
                 std::vector<double>* vec) {
    const auto cells = static_cast<std::size_t>(std::llround(2.0 * half / h));
    const std::size_t m = cells - 1;
    Tridiagonal t;
    t.diag.resize(m);
    t.off.assign(m > 0 ? m - 1 : 0, -1.0 / (h * h));
    for (std::size_t k = 0; k < m; ++k) {
        const double x = -half + static_cast<double>(k + 1) * h;
        t.diag[k] = 2.0 / (h * h) - potential_average(arr, x - 0.5 * h, x + 0.5 * h);
        if (grid) {
            grid->push_back(x);
        }
    }
    const double e = tridiag_lowest(t, 1).front();
    if (vec) {
        *vec = tridiag_lowest_vector(t, e);
    }
    return e;
}

}  // namespace

GroundState1D ground_state_1d(const WellArray1D& arr, std::size_t window_wells, std::size_t n_per_a) {
    validate(arr);
    if (window_wells % 2 == 0 || window_wells < 21) {
        throw DomainError("ground_state_1d: window_wells must be odd and at least 21");
    }
    if (n_per_a < 4) {
        throw DomainError("ground_state_1d: n_per_a must be at least 4");
    }
    const long reach = static_cast<long>(window_wells / 2);
    for (const auto& [n, d] : arr.shifts) {
        if (d != 0.0 && std::labs(n) + 10 > reach) {
            throw DomainError("ground_state_1d: window must hold every shifted well plus 10 unshifted wells per side");
        }
    }
    GroundState1D g;
    g.window_half = 0.5 * static_cast<double>(window_wells) * arr.spacing;
    const double h = arr.spacing / static_cast<double>(n_per_a);
    g.coarse = fd_lowest(arr, g.window_half, h, nullptr, nullptr);
    g.energy = fd_lowest(arr, g.window_half, 0.5 * h, &g.grid, &g.vector);
    g.richardson = (4.0 * g.energy - g.coarse) / 3.0;
    double sum = 0.0;
    double norm = 0.0;
    for (double v : g.vector) {
        sum += v;
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : g.vector) {
        v = (sum < 0.0 ? -v : v) / norm;
    }
    return g;
}

namespace {

double crossing_kappa(const WellArray1D& arr, double kappa0, double mu0, double target, std::size_t ppw,
                      const OnedBoundOptions& options) {
    auto f = [&](double kappa) { return mu_max(build_1d_bs(arr, kappa, options.window_W, ppw)) - target; };
    const double excess = mu0 - target;
    double step = kappa0 * std::max(2.0 * excess, 1e-10);
    double hi = kappa0 + step;
    double f_hi = f(hi);
    for (std::size_t k = 0; f_hi >= 0.0; ++k) {
        if (k >= options.max_expansions) {
            throw NumericalError("bound_below_band_bs: bracket expansion exhausted");
        }
        step *= 1.5;
        hi = kappa0 + step;
        f_hi = f(hi);
    }
    return brent_root(f, Bracket{kappa0, hi, excess, f_hi}, options.root_tol);
}

}  // namespace

OnedBoundResult bound_below_band_bs(const WellArray1D& arr, double kappa0, const OnedBoundOptions& options) {
    validate(arr);
    if (!(kappa0 > 0.0)) {
        throw DomainError("bound_below_band_bs: kappa0 must be positive");
    }
    OnedBoundResult r;
    r.kappa0 = kappa0;
    const WellArray1D reference = arr.unshifted();
    const std::size_t ppw = options.points_per_well;
    r.mu_reference = mu_max(build_1d_bs(reference, kappa0, options.window_W, ppw));
    r.mu_at_kappa0 = mu_max(build_1d_bs(arr, kappa0, options.window_W, ppw));
    r.margin = r.mu_at_kappa0 - r.mu_reference;
    if (!(r.margin > options.margin_tol)) {
        return r;
    }
    const double target = r.mu_at_kappa0 > 1.0 ? 1.0 : r.mu_reference;
    r.crossing = r.mu_at_kappa0 > 1.0 ? "plain" : "calibrated";
    const double ks = crossing_kappa(arr, kappa0, r.mu_at_kappa0, target, ppw, options);
    r.kappa_star = ks;
    r.energy = -ks * ks;
    if (options.richardson) {
        // Same target rule on the finer grid.
        const double ref2 = mu_max(build_1d_bs(reference, kappa0, options.window_W, 2 * ppw));
        const double mu2 = mu_max(build_1d_bs(arr, kappa0, options.window_W, 2 * ppw));
        if (!(mu2 - ref2 > options.margin_tol)) {
            throw NumericalError("bound_below_band_bs: margin lost under grid doubling");
        }
        const double target2 = mu2 > 1.0 ? 1.0 : ref2;
        const double k2 = crossing_kappa(arr, kappa0, mu2, target2, 2 * ppw, options);
        r.energy_fine = -k2 * k2;
        r.energy_extrapolated = (4.0 * *r.energy_fine - *r.energy) / 3.0;
    }
    return r;
}

std::vector<double> convexity_witness(const WellArray1D& arr, double kappa, std::size_t wells,
                                      std::size_t samples) {
    if (wells % 2 == 0 || samples == 0 || !(kappa > 0.0)) {
        throw DomainError("convexity_witness: need odd wells, samples > 0, kappa > 0");
    }
    const long reach = static_cast<long>(wells / 2);
    const double a = arr.spacing;
    const double b = arr.well.width;
    auto R = [&](double z) { return std::exp(-kappa * std::abs(z)) / (2.0 * kappa); };
    std::vector<double> out;
    for (std::size_t p = 0; p < samples; ++p) {
        const double xi = -0.5 * b + (static_cast<double>(p) + 0.5) * b / static_cast<double>(samples);
        for (std::size_t q = 0; q < samples; ++q) {
            const double xj = -0.5 * b + (static_cast<double>(q) + 0.5) * b / static_cast<double>(samples);
            double s = 0.0;
            for (long i = -reach; i <= reach; ++i) {
                for (long j = -reach; j <= reach; ++j) {
                    if (i == j) {
                        continue;
                    }
                    s += R(arr.center(i) - arr.center(j) + xi - xj) - R(static_cast<double>(i - j) * a + xi - xj);
                }
            }
            out.push_back(s);
        }
    }
    return out;
}

namespace {

// s(x) of the unshifted curve on a uniform table, cubic Hermite with exact slopes J.
class ArcTable {
public:
    ArcTable(const CurveSpec& spec, double x_half, std::size_t per_period) : spec_(spec) {
        const double a = spec.period_a;
        const auto periods = static_cast<std::size_t>(std::ceil(x_half / a));
        x0_ = -static_cast<double>(periods) * a;
        dx_ = a / static_cast<double>(per_period);
        const std::size_t cells = 2 * periods * per_period;
        s_.assign(cells + 1, 0.0);
        j_.assign(cells + 1, 0.0);
        for (std::size_t k = 0; k <= cells; ++k) {
            j_[k] = geometry::arc_element(spec, node(k));
            if (k > 0) {
                s_[k] = s_[k - 1] + dx_ * geometry::arc_element(spec, node(k) - 0.5 * dx_);
            }
        }
        const double mid = s_[cells / 2];  // node(cells/2) = 0
        for (double& v : s_) {
            v -= mid;
        }
    }

    double x_min() const { return x0_; }
    double x_max() const { return node(s_.size() - 1); }
    double s_of(double x) const {
        const std::size_t k = cell_of_x(x);
        return hermite(k, (x - node(k)) / dx_);
    }
    double x_of(double s) const {
        if (s <= s_.front() || s >= s_.back()) {
            throw DomainError("effective_spectrum: arc-length table too short");
        }
        const auto it = std::upper_bound(s_.begin(), s_.end(), s);
        const std::size_t k = static_cast<std::size_t>(it - s_.begin()) - 1;
        double t = (s - s_[k]) / (s_[k + 1] - s_[k]);
        for (int it_n = 0; it_n < 30; ++it_n) {
            const double g = hermite(k, t) - s;
            const double d = hermite_slope(k, t);
            const double step = g / d;
            t = std::clamp(t - step, 0.0, 1.0);
            if (std::abs(step) < 1e-15) {
                break;
            }
        }
        return node(k) + t * dx_;
    }

private:
    double node(std::size_t k) const { return x0_ + static_cast<double>(k) * dx_; }
    std::size_t cell_of_x(double x) const {
        const double u = (x - x0_) / dx_;
        const auto k = static_cast<std::ptrdiff_t>(std::floor(u));
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(s_.size()) - 2));
    }
    double hermite(std::size_t k, double t) const {
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * s_[k] + (t3 - 2 * t2 + t) * dx_ * j_[k] + (-2 * t3 + 3 * t2) * s_[k + 1] +
               (t3 - t2) * dx_ * j_[k + 1];
    }
    double hermite_slope(std::size_t k, double t) const {
        const double t2 = t * t;
        return (6 * t2 - 6 * t) * s_[k] + (3 * t2 - 4 * t + 1) * dx_ * j_[k] + (-6 * t2 + 6 * t) * s_[k + 1] +
               (3 * t2 - 2 * t) * dx_ * j_[k + 1];
    }

    const CurveSpec& spec_;
    double x0_ = 0.0;
    double dx_ = 0.0;
    std::vector<double> s_;
    std::vector<double> j_;
};

struct Piece {
    double x_lo;
    double x_hi;
    double shift;
};

}  // namespace

EffectiveSpectrum effective_spectrum(const CurveSpec& spec, double alpha, const EffectiveOptions& options) {
    validate(spec);
    if (!geometry::profile_is_c2(spec.gamma)) {
        throw ModelError("effective_spectrum: the curvature potential needs a C^2 profile");
    }
    if (!(options.S_half > 0.0) || options.n < 3) {
        throw DomainError("effective_spectrum: need S_half > 0 and n >= 3");
    }
    for (const auto& term : spec.tau.terms) {
        if (!std::holds_alternative<StepShifts>(term)) {
            throw ModelError("effective_spectrum: only step_shifts deformations are supported");
        }
    }
    const CurveSpec base = spec.unperturbed();
    const double eps = spec.eps();

    // Pieces of constant tau in x; each moves rigidly in s by eps * tau.
    std::vector<double> cuts;
    for (const auto& term : spec.tau.terms) {
        for (const auto& st : std::get<StepShifts>(term).steps) {
            cuts.push_back(st.lo);
            cuts.push_back(st.hi);
            for (double x : {st.lo, st.hi}) {
                for (double off : {-std::abs(eps * st.shift), 0.0, std::abs(eps * st.shift)}) {
                    if (geometry::curvature_potential(base, x + off) != 0.0) {
                        throw ModelError("effective_spectrum: step ends must sit on straight segments");
                    }
                }
            }
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total_shift = 0.0;
    for (const auto& term : spec.tau.terms) {
        for (const auto& st : std::get<StepShifts>(term).steps) {
            total_shift += std::abs(eps * st.shift);
        }
    }
    const double x_half = options.S_half + total_shift + 2.0 * spec.period_a;
    const ArcTable table(base, x_half, options.points_per_period);

    std::vector<Piece> pieces;
    {
        std::vector<double> edges{table.x_min()};
        for (double c : cuts) {
            if (c > table.x_min() && c < table.x_max()) {
                edges.push_back(c);
            }
        }
        edges.push_back(table.x_max());
        for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
            const double mid = 0.5 * (edges[k] + edges[k + 1]);
            pieces.push_back({edges[k], edges[k + 1], eps * geometry::tau(spec, mid)});
        }
    }

    EffectiveSpectrum out;
    out.alpha = alpha;
    out.arc_period = table.s_of(spec.period_a) - table.s_of(0.0);
    const double h = 2.0 * options.S_half / static_cast<double>(options.n + 1);
    const double floor_v = -0.25 * alpha * alpha;
    Tridiagonal t;
    t.diag.resize(options.n);
    t.off.assign(options.n - 1, -1.0 / (h * h));
    for (std::size_t k = 0; k < options.n; ++k) {
        const double s = -options.S_half + static_cast<double>(k + 1) * h;
        double v = 0.0;
        for (const auto& p : pieces) {
            const double s_lo = table.s_of(p.x_lo) + p.shift;
            const double s_hi = table.s_of(p.x_hi) + p.shift;
            if (s >= s_lo && s < s_hi) {
                v = geometry::curvature_potential(base, table.x_of(s - p.shift));
                break;
            }
        }
        out.s.push_back(s);
        out.potential.push_back(floor_v + v);
        t.diag[k] = 2.0 / (h * h) + floor_v + v;
    }
    const std::size_t below = std::min(sturm_count(t, floor_v), options.max_levels);
    if (below > 0) {
        out.levels = tridiag_lowest(t, below);
    }
    return out;
}

WellArray1D curvature_wells(const CurveSpec& spec, std::size_t samples) {
    const auto* bump = std::get_if<BumpTrainProfile>(&spec.gamma);
    if (bump == nullptr) {
        throw ModelError("curvature_wells: needs a bump_train profile");
    }
    if (samples < 3) {
        throw DomainError("curvature_wells: need at least 3 samples");
    }
    const CurveSpec base = spec.unperturbed();
    const double w = bump->half_width;
    const ArcTable table(base, spec.period_a, 4096);
    const double s_lo = table.s_of(-w);
    const double s_hi = table.s_of(w);
    WellArray1D arr;
    arr.spacing = table.s_of(spec.period_a) - table.s_of(0.0);
    arr.well.shape = WellShape::sampled;
    arr.well.width = s_hi - s_lo;
    arr.well.samples.resize(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const double s = s_lo + (s_hi - s_lo) * static_cast<double>(k) / static_cast<double>(samples - 1);
        const double x = (k == 0) ? -w : (k + 1 == samples ? w : table.x_of(s));
        arr.well.samples[k] = -geometry::curvature_potential(base, x);
    }
    arr.well.depth = *std::max_element(arr.well.samples.begin(), arr.well.samples.end());
    return arr;
}

std::vector<CouplingRow> strong_coupling_compare(const CurveSpec& spec, const std::vector<double>& alpha_list,
                                                 const CouplingOptions& options) {
    const CurveSpec periodic = spec.unperturbed();
    const double a = spec.period_a;
    for (std::size_t k = 1; k < alpha_list.size(); ++k) {
        if (!(alpha_list[k] > alpha_list[k - 1])) {
            throw DomainError("strong_coupling_compare: alpha_list must be increasing");
        }
    }
    const WellArray1D wells = curvature_wells(periodic);
    const double band = band_bottom_1d(wells, options.steps_per_period).eps0;
    std::vector<CouplingRow> rows;
    for (double alpha : alpha_list) {
        if (!(0.5 * alpha * a > 3.0)) {
            throw DomainError("strong_coupling_compare: alpha = " + fmt_double(alpha) + " violates kappa0 a > 3");
        }
        ThresholdOptions to;
        to.n_cell = std::max(options.min_cell,
                             static_cast<std::size_t>(std::ceil(0.55 * alpha * a / options.kappa_h)));
        const Threshold th = find_threshold(periodic, alpha, to);
        CouplingRow row;
        row.alpha = alpha;
        row.n_cell = to.n_cell;
        row.eps2d = th.eps0;
        row.epseff = -0.25 * alpha * alpha + band;
        row.delta = std::abs(row.eps2d - row.epseff);
        row.ratio = row.delta * alpha / std::log(alpha);
        rows.push_back(row);
    }
    return rows;
}

std::string coupling_csv(const std::vector<CouplingRow>& rows) {
    std::ostringstream out;
    out << "alpha,eps2d,epseff,delta,ratio\n";
    for (const auto& r : rows) {
        out << fmt_double(r.alpha) << ',' << fmt_double(r.eps2d) << ',' << fmt_double(r.epseff) << ','
            << fmt_double(r.delta) << ',' << fmt_double(r.ratio) << '\n';
    }
    return out.str();
}

}  // namespace leaky
