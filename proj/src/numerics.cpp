#include "leaky/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "leaky/errors.hpp"
#include "leaky/specfun.hpp"

namespace leaky {

SymMatrix::SymMatrix(std::size_t n, std::string label)
    : n_(n), data_(n * (n + 1) / 2, 0.0), label_(std::move(label)) {}

double SymMatrix::frobenius_norm() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        const auto row = lower_row(i);
        for (std::size_t j = 0; j < i; ++j) {
            sum += 2.0 * row[j] * row[j];
        }
        sum += row[i] * row[i];
    }
    return std::sqrt(sum);
}

std::vector<double> SymMatrix::multiply(std::span<const double> v) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const auto row = lower_row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            s += row[j] * v[j];
            out[j] += row[j] * v[i];
        }
        out[i] += s + row[i] * v[i];
    }
    return out;
}

namespace {

constexpr int kQlIterationCap = 64;

// Householder reduction of a packed lower triangle to tridiagonal form,
// reducing rows from the bottom up. On return d holds the diagonal, e the
// sub-diagonal (e[i] couples i-1 and i, e[0] = 0), and each reduced row i of
// `a` keeps its Householder vector in elements 0..i-1 with norm factor h[i].
struct Reduction {
    std::vector<double> d;
    std::vector<double> e;
    std::vector<double> h;
};

Reduction tridiagonalize(SymMatrix& a) {
    const std::size_t n = a.order();
    Reduction r{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n, 0.0)};
    std::vector<double> p(n);
    for (std::size_t i = n - 1; i >= 1; --i) {
        const std::size_t l = i - 1;
        auto u = a.lower_row(i);
        double h = 0.0;
        if (l > 0) {
            double scale = 0.0;
            for (std::size_t k = 0; k <= l; ++k) {
                scale += std::abs(u[k]);
            }
            if (scale == 0.0) {
                r.e[i] = u[l];
            } else {
                for (std::size_t k = 0; k <= l; ++k) {
                    u[k] /= scale;
                    h += u[k] * u[k];
                }
                double f = u[l];
                const double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                r.e[i] = scale * g;
                h -= f * g;
                u[l] = f - g;
                // p = A_l u / h with A_l the leading (l+1) block, row-oriented.
                std::fill(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(l + 1), 0.0);
                for (std::size_t j = 0; j <= l; ++j) {
                    const auto row = a.lower_row(j);
                    double s = 0.0;
                    const double uj = u[j];
                    for (std::size_t k = 0; k < j; ++k) {
                        s += row[k] * u[k];
                        p[k] += row[k] * uj;
                    }
                    p[j] += s + row[j] * uj;
                }
                f = 0.0;
                for (std::size_t j = 0; j <= l; ++j) {
                    p[j] /= h;
                    f += p[j] * u[j];
                }
                const double hh = f / (h + h);
                for (std::size_t j = 0; j <= l; ++j) {
                    p[j] -= hh * u[j];
                }
                for (std::size_t j = 0; j <= l; ++j) {
                    auto row = a.lower_row(j);
                    const double fj = u[j];
                    const double gj = p[j];
                    for (std::size_t k = 0; k <= j; ++k) {
                        row[k] -= fj * p[k] + gj * u[k];
                    }
                }
            }
        } else {
            r.e[i] = u[l];
        }
        r.h[i] = h;
    }
    r.e[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r.d[i] = a.lower_row(i)[i];
    }
    return r;
}

// Orthogonal factor of the reduction, returned transposed: row i of the
// result is column i of Q.
std::vector<double> accumulate_q(const SymMatrix& a, const Reduction& r) {
    const std::size_t n = a.order();
    std::vector<double> z(n * n, 0.0);  // row-major Q
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 1 && r.h[i] != 0.0) {
            const std::size_t l = i - 1;
            const auto u = a.lower_row(i);
            std::fill(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(l + 1), 0.0);
            for (std::size_t k = 0; k <= l; ++k) {
                const double uk = u[k];
                const double* zk = &z[k * n];
                for (std::size_t j = 0; j <= l; ++j) {
                    g[j] += uk * zk[j];
                }
            }
            for (std::size_t k = 0; k <= l; ++k) {
                const double c = u[k] / r.h[i];
                double* zk = &z[k * n];
                for (std::size_t j = 0; j <= l; ++j) {
                    zk[j] -= g[j] * c;
                }
            }
        }
        z[i * n + i] = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
            z[i * n + j] = 0.0;
            z[j * n + i] = 0.0;
        }
    }
    std::vector<double> zt(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            zt[j * n + i] = z[i * n + j];
        }
    }
    return zt;
}

// Implicit-shift QL on the tridiagonal (d, e). When zt is non-null its rows
// are rotated along with the iteration and end up as the eigenvectors.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, std::vector<double>* zt,
                 const std::string& label) {
    const std::size_t n = d.size();
    if (n == 0) {
        return;
    }
    for (std::size_t i = 1; i < n; ++i) {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m = l;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) {
                    break;
                }
            }
            if (m != l) {
                if (iter++ == kQlIterationCap) {
                    throw NumericalError("sym_eig: QL iteration cap reached for matrix '" + label + "'");
                }
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                bool underflow = false;
                for (std::size_t ii = m; ii-- > l;) {
                    double f = s * e[ii];
                    const double b = c * e[ii];
                    r = std::hypot(f, g);
                    e[ii + 1] = r;
                    if (r == 0.0) {
                        d[ii + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[ii + 1] - p;
                    r = (d[ii] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[ii + 1] = g + p;
                    g = c * r - b;
                    if (zt != nullptr) {
                        double* zi = &(*zt)[ii * n];
                        double* zi1 = &(*zt)[(ii + 1) * n];
                        for (std::size_t k = 0; k < n; ++k) {
                            f = zi1[k];
                            zi1[k] = s * zi[k] + c * f;
                            zi[k] = c * zi[k] - s * f;
                        }
                    }
                }
                if (underflow) {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

void check_finite(const SymMatrix& m) {
    for (std::size_t i = 0; i < m.order(); ++i) {
        for (double v : m.lower_row(i)) {
            if (!std::isfinite(v)) {
                throw NumericalError("sym_eig: non-finite entry in matrix '" + m.label() + "'");
            }
        }
    }
}

}  // namespace

std::vector<double> sym_eigenvalues(const SymMatrix& m) {
    check_finite(m);
    if (m.order() == 0) {
        return {};
    }
    SymMatrix work = m;
    Reduction r = tridiagonalize(work);
    ql_implicit(r.d, r.e, nullptr, m.label());
    std::sort(r.d.begin(), r.d.end(), std::greater<>());
    return r.d;
}

std::vector<EigenPair> sym_eig_top(const SymMatrix& m, std::size_t k) {
    const std::size_t n = m.order();
    if (k < 1 || k > n) {
        throw DomainError("sym_eig_top: need 1 <= k <= n");
    }
    check_finite(m);
    SymMatrix work = m;
    Reduction r = tridiagonalize(work);
    std::vector<double> zt = accumulate_q(work, r);
    ql_implicit(r.d, r.e, &zt, m.label());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r.d[a] > r.d[b]; });
    std::vector<EigenPair> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t idx = order[i];
        out.push_back({r.d[idx], std::vector<double>(zt.begin() + static_cast<std::ptrdiff_t>(idx * n),
                                                     zt.begin() + static_cast<std::ptrdiff_t>((idx + 1) * n))});
    }
    return out;
}

Bracket make_bracket(const std::function<double(double)>& f, double lo, double hi) {
    if (!(lo < hi)) {
        throw NumericalError("bracket: need lo < hi");
    }
    Bracket b{lo, hi, f(lo), f(hi)};
    if (!std::isfinite(b.f_lo) || !std::isfinite(b.f_hi)) {
        throw NumericalError("bracket: non-finite function value at an end point");
    }
    if (b.f_lo * b.f_hi > 0.0) {
        throw NumericalError("bracket: no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return b;
}

double brent_root(const std::function<double(double)>& f, const Bracket& br, double tol, int max_iter) {
    double a = br.lo;
    double b = br.hi;
    double fa = br.f_lo;
    double fb = br.f_hi;
    if (fa == 0.0) {
        return a;
    }
    if (fb == 0.0) {
        return b;
    }
    if (fa * fb > 0.0) {
        throw NumericalError("brent_root: no sign change in bracket");
    }
    double c = a;
    double fc = fa;
    double d = b - a;
    double e = d;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int iter = 0; iter < max_iter; ++iter) {
        if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) {
            return b;
        }
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            const double s = fb / fa;
            double p;
            double q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) {
                q = -q;
            }
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : std::copysign(tol1, xm);
        fb = f(b);
        if (!std::isfinite(fb)) {
            throw NumericalError("brent_root: non-finite function value");
        }
    }
    throw NumericalError("brent_root: iteration cap reached");
}

double log_diag_weight(double h, double kappa, double alpha) {
    return alpha / (2.0 * std::numbers::pi) * (-std::log(0.25 * kappa * h) - specfun::euler_gamma + 1.0);
}

double zeta_diag_weight(double h, double kappa, double alpha) {
    return alpha / (2.0 * std::numbers::pi) *
           (-std::log(kappa * h / (4.0 * std::numbers::pi)) - specfun::euler_gamma);
}

std::size_t sturm_count(const Tridiagonal& t, double x) {
    const std::size_t n = t.diag.size();
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double b2 = i == 0 ? 0.0 : t.off[i - 1] * t.off[i - 1];
        q = t.diag[i] - x - (i == 0 ? 0.0 : b2 / q);
        if (q == 0.0) {
            q = -std::numeric_limits<double>::min();
        }
        if (q < 0.0) {
            ++count;
        }
    }
    return count;
}

std::vector<double> tridiag_lowest(const Tridiagonal& t, std::size_t count, double tol) {
    const std::size_t n = t.diag.size();
    count = std::min(count, n);
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(t.off[i]) : 0.0);
        lo = std::min(lo, t.diag[i] - r);
        hi = std::max(hi, t.diag[i] + r);
    }
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        double a = out.empty() ? lo : out.back() - tol;
        double b = hi;
        while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b)) * 0.5) {
            const double mid = 0.5 * (a + b);
            if (mid == a || mid == b) {
                break;
            }
            if (sturm_count(t, mid) > k) {
                b = mid;
            } else {
                a = mid;
            }
        }
        out.push_back(0.5 * (a + b));
    }
    return out;
}

std::vector<double> tridiag_lowest_vector(const Tridiagonal& t, double lambda) {
    const std::size_t n = t.diag.size();
    // Shift just below the eigenvalue so that T - sigma I is positive definite
    // and the Thomas elimination needs no pivoting.
    const double sigma = lambda - 1e-9 * std::max(1.0, std::abs(lambda));
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> c(n);
    std::vector<double> y(n);
    for (int sweep = 0; sweep < 4; ++sweep) {
        double denom = t.diag[0] - sigma;
        c[0] = n > 1 ? t.off[0] / denom : 0.0;
        y[0] = x[0] / denom;
        for (std::size_t i = 1; i < n; ++i) {
            denom = t.diag[i] - sigma - t.off[i - 1] * c[i - 1];
            c[i] = i + 1 < n ? t.off[i] / denom : 0.0;
            y[i] = (x[i] - t.off[i - 1] * y[i - 1]) / denom;
        }
        for (std::size_t i = n - 1; i-- > 0;) {
            y[i] -= c[i] * y[i + 1];
        }
        double norm2 = 0.0;
        for (double v : y) {
            norm2 += v * v;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = y[i] * inv;
        }
    }
    return x;
}

}  // namespace leaky
