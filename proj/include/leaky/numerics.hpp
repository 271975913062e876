#pragma once

// Dense symmetric eigensolver, Brent root finder, tridiagonal Sturm tools and
// the Nystrom diagonal weights for a logarithmic kernel singularity.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace leaky {

/// Real symmetric matrix; only the lower triangle is stored (row-packed).
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t n, std::string label = {});

    std::size_t order() const { return n_; }
    const std::string& label() const { return label_; }
    void set_label(std::string label) { label_ = std::move(label); }

    /// Element (i, j) for any ordering of the indices.
    double operator()(std::size_t i, std::size_t j) const {
        return i >= j ? data_[offset(i) + j] : data_[offset(j) + i];
    }
    /// Writes both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double value) {
        if (i >= j) {
            data_[offset(i) + j] = value;
        } else {
            data_[offset(j) + i] = value;
        }
    }
    /// Elements (i, 0..i).
    std::span<const double> lower_row(std::size_t i) const { return {data_.data() + offset(i), i + 1}; }
    std::span<double> lower_row(std::size_t i) { return {data_.data() + offset(i), i + 1}; }

    double frobenius_norm() const;
    std::vector<double> multiply(std::span<const double> v) const;

private:
    static std::size_t offset(std::size_t i) { return i * (i + 1) / 2; }

    std::size_t n_ = 0;
    std::vector<double> data_;
    std::string label_;
};

struct EigenPair {
    double value = 0.0;
    std::vector<double> vector;
};

/// All eigenvalues, sorted in descending order.
std::vector<double> sym_eigenvalues(const SymMatrix& m);

/// The k largest eigenpairs, descending, with orthonormal eigenvectors.
/// Throws NumericalError if the QL iteration exceeds its cap.
std::vector<EigenPair> sym_eig_top(const SymMatrix& m, std::size_t k);

/// Sign-changing interval for a scalar function.
struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    double f_lo = 0.0;
    double f_hi = 0.0;
};

/// Evaluates f at both ends; throws NumericalError without a sign change.
Bracket make_bracket(const std::function<double(double)>& f, double lo, double hi);

inline constexpr double kDefaultRootTol = 1e-10;
inline constexpr int kRootIterationCap = 200;

/// Brent's method (inverse quadratic interpolation guarded by bisection).
/// The result always lies inside [b.lo, b.hi].
double brent_root(const std::function<double(double)>& f, const Bracket& b,
                  double tol = kDefaultRootTol, int max_iter = kRootIterationCap);

/// Cell average of (alpha/2pi) [-ln(kappa|u|/2) - gamma_E] over |u| < h/2:
/// (alpha/2pi) [-ln(kappa h / 4) - gamma_E + 1].
double log_diag_weight(double h, double kappa, double alpha);

/// Diagonal value that makes the punctured trapezoidal rule exact to O(h^3)
/// for the kernel (alpha/2pi) K0(kappa|u|) on a uniform grid:
/// (alpha/2pi) [-ln(kappa h / (4 pi)) - gamma_E].
double zeta_diag_weight(double h, double kappa, double alpha);

/// Symmetric tridiagonal matrix: diagonal (n) and off-diagonal (n - 1).
struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;
};

/// Number of eigenvalues strictly below x (Sturm sequence).
std::size_t sturm_count(const Tridiagonal& t, double x);

/// The `count` smallest eigenvalues, ascending, by bisection to absolute tol.
std::vector<double> tridiag_lowest(const Tridiagonal& t, std::size_t count, double tol = 1e-13);

/// Unit eigenvector for the lowest eigenvalue `lambda` (inverse iteration).
std::vector<double> tridiag_lowest_vector(const Tridiagonal& t, double lambda);

}  // namespace leaky
