#include "leaky/bsop.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "leaky/errors.hpp"
#include "leaky/format.hpp"
#include "leaky/specfun.hpp"

namespace leaky {
namespace {

constexpr double kInvTwoPi = 0.5 / std::numbers::pi;

double diagonal_value(DiagonalRule rule, double h, double kappa, double alpha) {
    return rule == DiagonalRule::zeta_corrected ? zeta_diag_weight(h, kappa, alpha)
                                                : log_diag_weight(h, kappa, alpha);
}

void check_rate(double kappa, double alpha) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw DomainError("bs assembly: kappa must be positive");
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw DomainError("bs assembly: alpha must be positive");
    }
}

}  // namespace

std::string to_string(BsKind kind) {
    switch (kind) {
        case BsKind::line:
            return "line";
        case BsKind::fiber:
            return "fiber";
        case BsKind::oned:
            return "oned";
    }
    return "unknown";
}

BSMatrix build_line_bs(const CurveSpec& spec, double alpha, double kappa, double window_W, std::size_t n,
                       const LineOptions& options) {
    check_rate(kappa, alpha);
    if (spec.tau.has_steps()) {
        throw ModelError("build_line_bs: step_shifts deformations are not Lipschitz");
    }
    if (!(window_W > 0.0) || n == 0) {
        throw DomainError("build_line_bs: need W > 0 and n > 0");
    }
    const double a = spec.period_a;
    const double h = 2.0 * window_W / static_cast<double>(n);
    if (h * static_cast<double>(options.min_points_per_period) > a * (1.0 + 1e-12)) {
        throw NumericalError("build_line_bs: fewer than " + std::to_string(options.min_points_per_period) +
                             " points per period");
    }
    if (kappa * h > options.max_kappa_h) {
        throw NumericalError("build_line_bs: resolution too coarse, kappa*h = " + fmt_double(kappa * h));
    }
    if (auto support = geometry::tau_support(spec)) {
        const double margin = options.edge_periods * a;
        if (!(support->first > -window_W + margin && support->second < window_W - margin)) {
            throw NumericalError("build_line_bs: window too small, supp tau' must lie in (-W + " +
                                 fmt_double(options.edge_periods) + "a, W - " + fmt_double(options.edge_periods) +
                                 "a)");
        }
    }

    const CurveSpec reference = spec.unperturbed();
    BSMatrix bs;
    bs.kind = BsKind::line;
    bs.kappa = kappa;
    bs.alpha = alpha;
    bs.step = h;
    bs.window = window_W;
    bs.grid.resize(n);
    bs.weights.resize(n);
    std::vector<Vec2> pts(n);
    std::vector<double> jac(n);
    std::vector<double> wj(n);  // J used for the measure
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -window_W + (static_cast<double>(i) + 0.5) * h;
        bs.grid[i] = x;
        pts[i] = geometry::point(spec, x);
        jac[i] = geometry::arc_element(spec, x);
        wj[i] = options.weighting == Weighting::arc_length ? jac[i] : geometry::arc_element(reference, x);
        bs.weights[i] = std::sqrt(wj[i]);
    }
    bs.matrix = SymMatrix(n, "line kappa=" + fmt_double(kappa));
    const double c = alpha * kInvTwoPi * h;
    for (std::size_t i = 0; i < n; ++i) {
        auto row = bs.matrix.lower_row(i);
        for (std::size_t j = 0; j < i; ++j) {
            const double d = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
            row[j] = c * specfun::bessel_k0(kappa * d) * bs.weights[i] * bs.weights[j];
        }
        // The log singularity scales with the true arc element: d ~ J |u|.
        row[i] = wj[i] * h * diagonal_value(options.diagonal, h, kappa * jac[i], alpha);
    }
    return bs;
}

double image_tail_bound(double alpha, double kappa, double period, std::size_t n_images) {
    if (n_images < 2) {
        return std::numeric_limits<double>::infinity();
    }
    return alpha * kInvTwoPi * specfun::bessel_k0(kappa * (static_cast<double>(n_images) - 1.0) * period);
}

std::size_t auto_image_count(double alpha, double kappa, double period, double tail_tol) {
    std::size_t m = 2;
    while (image_tail_bound(alpha, kappa, period, m) >= tail_tol) {
        ++m;
        if (m > 100000) {
            throw NumericalError("fiber: lattice sum needs more than 1e5 images");
        }
    }
    return m;
}

BSMatrix build_fiber_bs(const CurveSpec& spec, double alpha, double kappa, const FiberConfig& fc,
                        std::size_t n_cell, DiagonalRule diagonal) {
    check_rate(kappa, alpha);
    if (!spec.tau.is_zero()) {
        throw ModelError("build_fiber_bs: fiber operators need the periodic curve (tau = 0)");
    }
    if (n_cell == 0) {
        throw DomainError("build_fiber_bs: n_cell must be positive");
    }
    const double a = spec.period_a;
    const double h = a / static_cast<double>(n_cell);
    if (kappa * h > 0.5) {
        throw NumericalError("build_fiber_bs: resolution too coarse, kappa*h = " + fmt_double(kappa * h));
    }
    const std::size_t images = fc.n_images == 0 ? auto_image_count(alpha, kappa, a, fc.tail_tol) : fc.n_images;
    const double tail = image_tail_bound(alpha, kappa, a, images);
    if (tail > fc.tail_tol) {
        throw NumericalError("build_fiber_bs: lattice-sum tail bound " + fmt_double(tail) + " exceeds tail_tol");
    }

    BSMatrix bs;
    bs.kind = BsKind::fiber;
    bs.theta = fc.theta;
    bs.kappa = kappa;
    bs.alpha = alpha;
    bs.step = h;
    bs.window = 0.5 * a;
    bs.n_images = images;
    bs.tail_bound = tail;
    bs.grid.resize(n_cell);
    bs.weights.resize(n_cell);
    std::vector<Vec2> pts(n_cell);
    std::vector<double> jac(n_cell);
    for (std::size_t i = 0; i < n_cell; ++i) {
        const double x = -0.5 * a + (static_cast<double>(i) + 0.5) * h;
        bs.grid[i] = x;
        pts[i] = geometry::point(spec, x);
        jac[i] = geometry::arc_element(spec, x);
        bs.weights[i] = std::sqrt(jac[i]);
    }
    const long m_max = static_cast<long>(images);
    std::vector<double> cos_m(2 * images + 1);
    std::vector<double> sin_m(2 * images + 1);
    bool real = true;
    for (long m = -m_max; m <= m_max; ++m) {
        const double phase = fc.theta * static_cast<double>(m) * a;
        cos_m[static_cast<std::size_t>(m + m_max)] = std::cos(phase);
        sin_m[static_cast<std::size_t>(m + m_max)] = std::sin(phase);
    }
    // e^{i theta m a} is real for theta = 0 and at the zone edges.
    if (std::abs(std::sin(fc.theta * a)) > 1e-14) {
        real = false;
    }
    const double c = alpha * kInvTwoPi * h;
    const std::size_t n = n_cell;
    SymMatrix re(n);
    std::vector<double> im(n * n, 0.0);  // im[i*n + j] for i > j
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sr = 0.0;
            double si = 0.0;
            const double dx = pts[i].x - pts[j].x;
            const double dy = pts[i].y - pts[j].y;
            for (long m = -m_max; m <= m_max; ++m) {
                if (i == j && m == 0) {
                    continue;
                }
                const double k0 = specfun::bessel_k0(kappa * std::hypot(dx - static_cast<double>(m) * a, dy));
                const auto idx = static_cast<std::size_t>(m + m_max);
                sr += k0 * cos_m[idx];
                si += k0 * sin_m[idx];
            }
            const double w = bs.weights[i] * bs.weights[j];
            if (i == j) {
                re.lower_row(i)[i] = c * sr * w + jac[i] * h * diagonal_value(diagonal, h, kappa * jac[i], alpha);
            } else {
                re.lower_row(i)[j] = c * sr * w;
                im[i * n + j] = c * si * w;
            }
        }
    }
    const std::string label = "fiber theta=" + fmt_double(fc.theta) + " kappa=" + fmt_double(kappa);
    if (real) {
        re.set_label(label);
        bs.matrix = std::move(re);
        return bs;
    }
    bs.complex_embedded = true;
    bs.matrix = SymMatrix(2 * n, label);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double r = re(i, j);
            bs.matrix.set(i, j, r);
            bs.matrix.set(n + i, n + j, r);
        }
        for (std::size_t j = 0; j < n; ++j) {
            // lower block [Im]: entry (n+i, j) = Im(i, j), Im antisymmetric.
            double v = 0.0;
            if (i > j) {
                v = im[i * n + j];
            } else if (j > i) {
                v = -im[j * n + i];
            }
            bs.matrix.set(n + i, j, v);
        }
    }
    return bs;
}

BSMatrix build_1d_bs(const WellArray1D& arr, double kappa, double window_W, std::size_t points_per_well) {
    validate(arr);
    if (!(kappa > 0.0)) {
        throw DomainError("build_1d_bs: kappa must be positive");
    }
    if (points_per_well == 0 || !(window_W > 0.0)) {
        throw DomainError("build_1d_bs: need W > 0 and points_per_well > 0");
    }
    const double a = arr.spacing;
    const double b = arr.well.width;
    const long n_max = static_cast<long>(std::floor(window_W / a + 1e-12));
    for (const auto& [site, d] : arr.shifts) {
        if (d != 0.0 && std::labs(site) > n_max) {
            throw NumericalError("build_1d_bs: shifted well " + std::to_string(site) + " lies outside the window");
        }
    }
    const double h = b / static_cast<double>(points_per_well);
    BSMatrix bs;
    bs.kind = BsKind::oned;
    bs.kappa = kappa;
    bs.alpha = 1.0;
    bs.step = h;
    bs.window = window_W;
    std::vector<double> root_v;
    for (long site = -n_max; site <= n_max; ++site) {
        const double c = arr.center(site);
        for (std::size_t k = 0; k < points_per_well; ++k) {
            const double xi = -0.5 * b + (static_cast<double>(k) + 0.5) * h;
            bs.grid.push_back(c + xi);
            root_v.push_back(std::sqrt(arr.well.value(xi)));
        }
    }
    bs.weights = root_v;
    const std::size_t n = bs.grid.size();
    bs.matrix = SymMatrix(n, "oned kappa=" + fmt_double(kappa));
    const double pref = h / (2.0 * kappa);
    // exact cell integral of e^{-kappa|u|} over |u| < h/2, divided by h
    const double diag_factor = 2.0 * (1.0 - std::exp(-0.5 * kappa * h)) / (kappa * h);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = bs.matrix.lower_row(i);
        for (std::size_t j = 0; j < i; ++j) {
            row[j] = pref * root_v[i] * root_v[j] * std::exp(-kappa * std::abs(bs.grid[i] - bs.grid[j]));
        }
        row[i] = pref * root_v[i] * root_v[i] * diag_factor;
    }
    return bs;
}

std::vector<double> bs_eigenvalues(const BSMatrix& bs) {
    std::vector<double> all = sym_eigenvalues(bs.matrix);
    if (!bs.complex_embedded) {
        return all;
    }
    std::vector<double> once;
    once.reserve(all.size() / 2);
    for (std::size_t i = 0; i < all.size(); i += 2) {
        once.push_back(0.5 * (all[i] + all[i + 1]));
    }
    return once;
}

double mu_max(const BSMatrix& bs) {
    return bs_eigenvalues(bs).front();
}

EigenPair top_eigenpair(const BSMatrix& bs) {
    if (bs.complex_embedded) {
        throw DomainError("top_eigenpair: complex fiber matrices are not supported");
    }
    EigenPair p = sym_eig_top(bs.matrix, 1).front();
    double sum = 0.0;
    for (double v : p.vector) {
        sum += v;
    }
    if (sum < 0.0) {
        for (double& v : p.vector) {
            v = -v;
        }
    }
    return p;
}

std::string dump_bs_matrix(const BSMatrix& bs) {
    std::ostringstream out;
    out << "bsmatrix kind=" << to_string(bs.kind);
    if (bs.kind == BsKind::fiber) {
        out << "(" << fmt_double(bs.theta) << ")";
    }
    out << " n=" << bs.matrix.order() << " kappa=" << fmt_double(bs.kappa) << " alpha=" << fmt_double(bs.alpha)
        << "\n";
    for (std::size_t i = 0; i < bs.matrix.order(); ++i) {
        const auto row = bs.matrix.lower_row(i);
        for (std::size_t j = 0; j <= i; ++j) {
            if (j > 0) {
                out << ' ';
            }
            out << fmt_double(row[j]);
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace leaky
