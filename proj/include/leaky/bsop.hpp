#pragma once

// Nystrom discretizations of the three Birman-Schwinger operators: the
// windowed full-line kernel (alpha/2pi) K0(kappa |Gamma(x) - Gamma(x')|), the
// quasi-periodized fiber kernel over one period cell, and the exponential
// kernel (1/2kappa) V^1/2 e^{-kappa|x-x'|} V^1/2 of a 1D well array.

#include <cstddef>
#include <string>
#include <vector>

#include "leaky/geometry.hpp"
#include "leaky/numerics.hpp"
#include "leaky/wells.hpp"

namespace leaky {

enum class BsKind { line, fiber, oned };

/// Nystrom value on the diagonal of the logarithmically singular kernel.
enum class DiagonalRule {
    /// Punctured trapezoidal rule with the zeta-function correction (O(h^3)).
    zeta_corrected,
    /// Cell average of the leading log term (O(h) globally).
    cell_average,
};

/// Symmetric weight sqrt(J(x) J(x')) of the unitary change of variables.
enum class Weighting {
    /// J = arc element of the deformed curve itself.
    arc_length,
    /// J = arc element of the undeformed curve (kernel compared in a fixed frame).
    reference,
};

struct BSMatrix {
    /// For complex fiber matrices: real symmetric embedding [[Re, -Im], [Im, Re]].
    SymMatrix matrix;
    std::vector<double> grid;
    /// Symmetric weights sqrt(J_i) used in the assembly.
    std::vector<double> weights;
    double step = 0.0;
    double window = 0.0;
    BsKind kind = BsKind::line;
    double theta = 0.0;
    double kappa = 0.0;
    double alpha = 0.0;
    bool complex_embedded = false;
    std::size_t n_images = 0;
    double tail_bound = 0.0;

    std::size_t size() const { return grid.size(); }
};

struct LineOptions {
    DiagonalRule diagonal = DiagonalRule::zeta_corrected;
    Weighting weighting = Weighting::arc_length;
    /// Periods required between supp tau' and each window edge.
    double edge_periods = 8.0;
    std::size_t min_points_per_period = 16;
    double max_kappa_h = 0.5;
};

/// Midpoint grid x_i = -W + (i + 1/2) h, h = 2W/n.
BSMatrix build_line_bs(const CurveSpec& spec, double alpha, double kappa, double window_W, std::size_t n,
                       const LineOptions& options = {});

struct FiberConfig {
    /// Quasimomentum in [-pi/a, pi/a].
    double theta = 0.0;
    /// Lattice images |m| <= n_images; 0 selects the smallest count meeting tail_tol.
    std::size_t n_images = 0;
    double tail_tol = 1e-12;
};

/// (alpha/2pi) K0(kappa (n_images - 1) a): bound on the first omitted image.
double image_tail_bound(double alpha, double kappa, double period, std::size_t n_images);
std::size_t auto_image_count(double alpha, double kappa, double period, double tail_tol);

/// Grid x_j = -a/2 + (j + 1/2) a / n_cell over one period cell.
BSMatrix build_fiber_bs(const CurveSpec& spec, double alpha, double kappa, const FiberConfig& fc,
                        std::size_t n_cell, DiagonalRule diagonal = DiagonalRule::zeta_corrected);

/// Wells whose unshifted site n*a lies in [-W, W], each tiled by
/// points_per_well midpoint cells.
BSMatrix build_1d_bs(const WellArray1D& arr, double kappa, double window_W, std::size_t points_per_well);

/// Eigenvalues in descending order; embedded complex matrices report each
/// eigenvalue of the Hermitian matrix once.
std::vector<double> bs_eigenvalues(const BSMatrix& bs);
double mu_max(const BSMatrix& bs);
/// Top eigenpair of a real BS matrix, sign fixed so that the sum of entries is positive.
EigenPair top_eigenpair(const BSMatrix& bs);

/// Text dump: `bsmatrix kind=<k> n=<n> kappa=<x> alpha=<x>` then one line per
/// lower-triangle row.
std::string dump_bs_matrix(const BSMatrix& bs);

std::string to_string(BsKind kind);

}  // namespace leaky
