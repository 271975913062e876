#include "leaky/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "leaky/errors.hpp"
#include "leaky/format.hpp"
#include "leaky/parallel.hpp"
#include "leaky/specfun.hpp"

namespace leaky {
namespace {

// Largest rate the fiber grid resolves (kappa h <= 0.5).
double fiber_kappa_cap(double period, std::size_t n_cell) {
    return 0.5 * static_cast<double>(n_cell) / period;
}

// Expands hi from start by `factor` until f(hi) < 0, never beyond cap.
double expand_upper(const std::function<double(double)>& f, double start, double factor, double cap,
                    std::size_t max_steps, const char* what) {
    double hi = std::min(start, cap);
    for (std::size_t k = 0; k <= max_steps; ++k) {
        if (f(hi) < 0.0) {
            return hi;
        }
        if (hi >= cap) {
            throw NumericalError(std::string(what) + ": no crossing below the resolution limit kappa*h = 0.5");
        }
        hi = std::min(hi * factor, cap);
    }
    throw NumericalError(std::string(what) + ": bracket expansion exhausted");
}

}  // namespace

std::string to_string(BoundStatus status) {
    switch (status) {
        case BoundStatus::found:
            return "found";
        case BoundStatus::inconclusive:
            return "inconclusive";
        case BoundStatus::insufficient_resolution:
            return "insufficient_resolution";
    }
    return "unknown";
}

Threshold find_threshold(const CurveSpec& spec, double alpha, const ThresholdOptions& options) {
    validate(spec);
    if (!spec.tau.is_zero()) {
        throw ModelError("find_threshold: the threshold is defined for the periodic curve (tau = 0)");
    }
    if (!(alpha > 0.0)) {
        throw DomainError("find_threshold: alpha must be positive");
    }
    FiberConfig fc;
    fc.n_images = options.n_images;
    fc.tail_tol = options.tail_tol;
    auto f = [&](double kappa) {
        return mu_max(build_fiber_bs(spec, alpha, kappa, fc, options.n_cell, options.diagonal)) - 1.0;
    };
    const double cap = fiber_kappa_cap(spec.period_a, options.n_cell);
    const double lo = 0.5 * alpha * (1.0 - 0.05);
    if (lo >= cap) {
        throw NumericalError("find_threshold: n_cell too small for alpha (kappa*h > 0.5)");
    }
    const double f_lo = f(lo);
    if (!(f_lo > 0.0)) {
        throw NumericalError("find_threshold: mu_max(0.95 alpha/2) = " + fmt_double(f_lo + 1.0) +
                             " does not exceed 1");
    }
    const double hi = expand_upper(f, lo * 1.25, 1.25, cap, 20, "find_threshold");
    Bracket b{lo, hi, f_lo, f(hi)};
    Threshold t;
    t.kappa0 = brent_root(f, b, options.tol);
    t.eps0 = -t.kappa0 * t.kappa0;
    const BSMatrix bs = build_fiber_bs(spec, alpha, t.kappa0, fc, options.n_cell, options.diagonal);
    t.n_cell = options.n_cell;
    t.n_images = bs.n_images;
    t.tail_bound = bs.tail_bound;
    t.mu_at_root = mu_max(bs);
    return t;
}

double BandStructure::band_min(std::size_t band) const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& e : energies) {
        if (band < e.size()) {
            v = std::min(v, e[band]);
        }
    }
    return v;
}

double BandStructure::band_max(std::size_t band) const {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& e : energies) {
        if (band < e.size()) {
            v = std::max(v, e[band]);
        }
    }
    return v;
}

BandStructure band_structure(const CurveSpec& spec, double alpha, const BandOptions& options) {
    validate(spec);
    if (!spec.tau.is_zero()) {
        throw ModelError("band_structure: bands are defined for the periodic curve (tau = 0)");
    }
    if (options.n_theta < 9 || options.n_theta % 2 == 0) {
        throw DomainError("band_structure: n_theta must be odd and at least 9");
    }
    if (options.bands == 0) {
        throw DomainError("band_structure: bands must be positive");
    }
    const double a = spec.period_a;
    BandStructure out;
    out.alpha = alpha;
    out.period = a;
    out.n_cell = options.n_cell;
    out.theta.resize(options.n_theta);
    const double zone = std::numbers::pi / a;
    const std::size_t half = options.n_theta / 2;
    for (std::size_t t = 0; t < options.n_theta; ++t) {
        // symmetric by construction: theta[t] = -theta[n-1-t] exactly
        const double k = static_cast<double>(t) - static_cast<double>(half);
        out.theta[t] = zone * k / static_cast<double>(half);
    }
    const double cap = fiber_kappa_cap(a, options.n_cell);
    const double kappa_lo = options.kappa_floor * 0.5 * alpha;

    struct Row {
        std::vector<double> energies;
        std::string status;
    };
    auto solve = [&](std::size_t t) {
        Row row;
        try {
            FiberConfig fc;
            fc.theta = out.theta[t];
            fc.tail_tol = options.tail_tol;
            auto mu = [&](double kappa) {
                return bs_eigenvalues(build_fiber_bs(spec, alpha, kappa, fc, options.n_cell));
            };
            const std::vector<double> at_lo = mu(kappa_lo);
            auto f0 = [&](double kappa) { return mu(kappa).front() - 1.0; };
            double hi = 0.0;
            if (at_lo.front() > 1.0) {
                hi = expand_upper(f0, 0.5 * alpha * 1.05, 1.25, cap, 20, "band_structure");
            }
            for (std::size_t j = 0; j < options.bands && j < at_lo.size(); ++j) {
                if (!(at_lo[j] > 1.0)) {
                    break;
                }
                auto fj = [&](double kappa) { return mu(kappa)[j] - 1.0; };
                Bracket b{kappa_lo, hi, at_lo[j] - 1.0, fj(hi)};
                const double kappa = brent_root(fj, b, options.tol);
                row.energies.push_back(-kappa * kappa);
            }
            row.status = "ok";
        } catch (const std::exception& e) {
            row.status = e.what();
        }
        return row;
    };
    auto rows = parallel_map(options.n_theta, solve, options.threads);
    for (auto& r : rows) {
        out.energies.push_back(std::move(r.energies));
        out.status.push_back(std::move(r.status));
    }
    return out;
}

namespace {

MarginSample margin_at(const CurveSpec& spec, const CurveSpec& reference, double alpha, double kappa0, double W,
                       std::size_t n, const LineOptions& line) {
    MarginSample s;
    s.window_W = W;
    s.n = n;
    s.mu_reference = mu_max(build_line_bs(reference, alpha, kappa0, W, n, line));
    s.mu_perturbed = mu_max(build_line_bs(spec, alpha, kappa0, W, n, line));
    s.margin = s.mu_perturbed - s.mu_reference;
    return s;
}

}  // namespace

BoundStateResult find_bound_state(const CurveSpec& spec, double alpha, double kappa0,
                                  const BoundStateOptions& options) {
    validate(spec);
    if (!(kappa0 > 0.0)) {
        throw DomainError("find_bound_state: kappa0 must be positive");
    }
    const CurveSpec reference = spec.unperturbed();
    BoundStateResult r;
    r.kappa0 = kappa0;
    r.eps0 = -kappa0 * kappa0;
    r.window_W = options.window_W;
    r.n = options.n;

    const MarginSample base = margin_at(spec, reference, alpha, kappa0, options.window_W, options.n, options.line);
    r.refinements.push_back(base);
    r.margin = base.margin;
    r.mu_reference = base.mu_reference;
    r.mu_perturbed = base.mu_perturbed;
    if (!(r.margin > options.margin_tol)) {
        r.status = BoundStatus::inconclusive;
        return r;
    }
    if (options.refine) {
        r.refinements.push_back(
            margin_at(spec, reference, alpha, kappa0, 2.0 * options.window_W, 2 * options.n, options.line));
        r.refinements.push_back(
            margin_at(spec, reference, alpha, kappa0, options.window_W, 2 * options.n, options.line));
        for (const auto& s : r.refinements) {
            if (!(s.margin > options.margin_tol)) {
                r.status = BoundStatus::insufficient_resolution;
                return r;
            }
        }
    }

    r.target = r.mu_perturbed > 1.0 ? 1.0 : r.mu_reference;
    r.crossing = r.mu_perturbed > 1.0 ? "plain" : "calibrated";
    if (options.target) {
        r.target = *options.target;
        r.crossing = r.target == 1.0 ? "plain" : "calibrated";
        if (!(r.mu_perturbed > r.target)) {
            r.status = BoundStatus::inconclusive;
            return r;
        }
    }
    auto f = [&](double kappa) {
        return mu_max(build_line_bs(spec, alpha, kappa, options.window_W, options.n, options.line)) - r.target;
    };
    // mu decreases roughly like 1/kappa: the crossing sits near kappa0 (1 + excess)
    const double excess = r.mu_perturbed - r.target;
    double step = kappa0 * std::max(2.0 * excess, 1e-8);
    double hi = kappa0 + step;
    double f_hi = f(hi);
    for (std::size_t k = 0; f_hi >= 0.0; ++k) {
        if (k >= options.max_expansions) {
            throw NumericalError("find_bound_state: no crossing after " + std::to_string(options.max_expansions) +
                                 " bracket expansions");
        }
        step *= 1.5;
        hi = kappa0 + step;
        f_hi = f(hi);
    }
    Bracket b{kappa0, hi, excess, f_hi};
    r.kappa_star = brent_root(f, b, options.root_tol);
    r.energy = -r.kappa_star * r.kappa_star;
    r.depth = std::abs(r.eps0 - r.energy);

    const BSMatrix bs = build_line_bs(spec, alpha, r.kappa_star, options.window_W, options.n, options.line);
    const EigenPair top = top_eigenpair(bs);
    r.mu_at_kappa_star = top.value;
    r.eigenvector = top.vector;
    r.grid = bs.grid;
    r.step = bs.step;
    r.arc_weights.resize(bs.grid.size());
    for (std::size_t i = 0; i < bs.grid.size(); ++i) {
        r.arc_weights[i] = geometry::arc_element(spec, bs.grid[i]);
    }
    if (options.scan_points >= 2) {
        for (std::size_t k = 0; k < options.scan_points; ++k) {
            const double kappa =
                kappa0 + (hi - kappa0) * static_cast<double>(k) / static_cast<double>(options.scan_points - 1);
            r.scan_kappa.push_back(kappa);
            r.scan_mu.push_back(f(kappa) + r.target);
        }
    }
    r.status = BoundStatus::found;
    return r;
}

namespace {

// Linear interpolation of a cell-periodic sample set on x_j = -a/2 + (j + 1/2) h.
double periodic_interp(const std::vector<double>& v, double period, double x) {
    const auto n = static_cast<double>(v.size());
    const double h = period / n;
    double u = (x + 0.5 * period) / h - 0.5;
    u -= n * std::floor(u / n);
    const double fl = std::floor(u);
    const double t = u - fl;
    const auto i0 = static_cast<std::size_t>(fl) % v.size();
    const auto i1 = (i0 + 1) % v.size();
    return (1.0 - t) * v[i0] + t * v[i1];
}

}  // namespace

double trial_function_gap(const CurveSpec& spec_tau, const CurveSpec& spec_0, double alpha, double kappa0,
                          double n_moll, const TrialOptions& options) {
    validate(spec_tau);
    validate(spec_0);
    if (!spec_0.tau.is_zero()) {
        throw ModelError("trial_function_gap: spec_0 must be periodic (tau = 0)");
    }
    if (!(n_moll > 0.0)) {
        throw DomainError("trial_function_gap: mollifier index must be positive");
    }
    FiberConfig fc;
    fc.tail_tol = options.tail_tol;
    const EigenPair ground = top_eigenpair(build_fiber_bs(spec_0, alpha, kappa0, fc, options.n_cell));
    std::vector<double> phi0 = ground.vector;
    double vmax = 0.0;
    for (double v : phi0) {
        vmax = std::max(vmax, std::abs(v));
    }
    for (double& v : phi0) {
        v /= vmax;
    }

    LineOptions line;
    line.weighting = Weighting::reference;
    const BSMatrix m_tau = build_line_bs(spec_tau, alpha, kappa0, options.window_W, options.n, line);
    const BSMatrix m_0 = build_line_bs(spec_0, alpha, kappa0, options.window_W, options.n, line);
    const std::size_t n = m_tau.size();
    std::vector<double> u(n);
    const double n2 = n_moll * n_moll;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = m_tau.grid[i];
        u[i] = n2 / (n2 + x * x) * periodic_interp(phi0, spec_0.period_a, x);
    }
    double gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto rt = m_tau.matrix.lower_row(i);
        const auto r0 = m_0.matrix.lower_row(i);
        double row = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            row += (rt[j] - r0[j]) * u[j];
        }
        gap += 2.0 * u[i] * row + u[i] * u[i] * (rt[i] - r0[i]);
    }
    return gap * m_tau.step;
}

std::vector<double> reconstruct_eigenfunction(const BoundStateResult& result, const CurveSpec& spec, double alpha,
                                              const std::vector<Vec2>& points) {
    if (!result.found() || result.eigenvector.empty()) {
        throw DomainError("reconstruct_eigenfunction: result carries no eigenvector");
    }
    const std::size_t n = result.grid.size();
    const double h = result.step;
    std::vector<Vec2> nodes(n);
    std::vector<double> density(n);  // phi_j J_j h
    for (std::size_t j = 0; j < n; ++j) {
        nodes[j] = geometry::point(spec, result.grid[j]);
        const double jac = result.arc_weights[j];
        density[j] = result.eigenvector[j] / std::sqrt(h * jac) * jac * h;
    }
    const double c = alpha * 0.5 / std::numbers::pi;
    const double reject = 0.5 * h * (1.0 - 1e-9);
    std::vector<double> psi;
    psi.reserve(points.size());
    for (const Vec2& p : points) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = std::hypot(p.x - nodes[j].x, p.y - nodes[j].y);
            if (d < reject) {
                throw DomainError("reconstruct_eigenfunction: point within h/2 of a curve node");
            }
            sum += specfun::bessel_k0(result.kappa_star * d) * density[j];
        }
        psi.push_back(c * sum);
    }
    return psi;
}

std::string band_csv(const BandStructure& bands) {
    std::ostringstream out;
    out << "theta,band,energy\n";
    for (std::size_t t = 0; t < bands.theta.size(); ++t) {
        for (std::size_t j = 0; j < bands.energies[t].size(); ++j) {
            out << fmt_double(bands.theta[t]) << ',' << j << ',' << fmt_double(bands.energies[t][j]) << '\n';
        }
    }
    return out.str();
}

}  // namespace leaky
