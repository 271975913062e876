#pragma once

// One-dimensional companions: arrays of shifted potential wells and the
// strong-coupling effective operator -d^2/ds^2 - alpha^2/4 - k(s)^2/4.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "leaky/geometry.hpp"
#include "leaky/wells.hpp"

namespace leaky {

struct Monodromy {
    double trace = 0.0;
    double det = 0.0;
};

/// Transfer matrix of -psi'' - V psi = E psi over one period [-a/2, a/2],
/// fixed-step RK4 with steps split across the well breakpoints.
Monodromy monodromy(const WellArray1D& arr, double energy, std::size_t steps_per_period = 400);

struct BandEdge {
    double eps0 = 0.0;
    double trace_at_edge = 0.0;
    double det_at_edge = 0.0;
    std::size_t steps_per_period = 0;
};

/// Bottom of the spectrum of the periodic array: smallest E with tr M(E) = 2.
BandEdge band_bottom_1d(const WellArray1D& arr, std::size_t steps_per_period = 400);

/// CSV `E,trM` over count equispaced energies in [e_lo, e_hi].
std::string discriminant_csv(const WellArray1D& arr, double e_lo, double e_hi, std::size_t count,
                             std::size_t steps_per_period = 400);

struct GroundState1D {
    /// Lowest eigenvalue on the fine grid (step a / (2 n_per_a)).
    double energy = 0.0;
    double coarse = 0.0;
    /// (4 fine - coarse) / 3.
    double richardson = 0.0;
    double window_half = 0.0;
    std::vector<double> grid;
    /// Fine-grid eigenvector, unit l2 norm, positive sum.
    std::vector<double> vector;
};

/// -d^2/dx^2 - V_delta on [-N a/2, N a/2] with Dirichlet ends; three-point
/// Laplacian with cell-averaged potential.
GroundState1D ground_state_1d(const WellArray1D& arr, std::size_t window_wells, std::size_t n_per_a);

/// Cell average of V_delta over [lo, hi].
double potential_average(const WellArray1D& arr, double lo, double hi);

struct OnedBoundOptions {
    double window_W = 0.0;
    std::size_t points_per_well = 16;
    double margin_tol = 1e-10;
    double root_tol = 1e-13;
    std::size_t max_expansions = 40;
    /// Also solve at 2 points_per_well and extrapolate the energy, (4 E_fine - E) / 3.
    bool richardson = false;
};

struct OnedBoundResult {
    double kappa0 = 0.0;
    double mu_reference = 0.0;
    double mu_at_kappa0 = 0.0;
    double margin = 0.0;
    std::string crossing = "none";
    std::optional<double> kappa_star;
    std::optional<double> energy;
    std::optional<double> energy_fine;
    std::optional<double> energy_extrapolated;

    /// Best available energy estimate: extrapolated when present.
    std::optional<double> best_energy() const { return energy_extrapolated ? energy_extrapolated : energy; }
};

/// Margin of the shifted array over the unshifted one at kappa0, then the
/// crossing mu_max(kappa*) = 1 (or = mu_reference when the window is short).
OnedBoundResult bound_below_band_bs(const WellArray1D& arr, double kappa0, const OnedBoundOptions& options);

/// Sum over well pairs (i, j), |i|,|j| <= wells/2, of
/// R(x_i - x_j + xi - xi') - R((i - j) a + xi - xi') with R(z) = e^{-kappa|z|}/2kappa,
/// for each (xi, xi') on a samples x samples grid over the well support.
std::vector<double> convexity_witness(const WellArray1D& arr, double kappa, std::size_t wells = 7,
                                      std::size_t samples = 9);

struct EffectiveOptions {
    double S_half = 0.0;
    std::size_t n = 0;
    std::size_t points_per_period = 64;
    std::size_t max_levels = 8;
};

struct EffectiveSpectrum {
    double alpha = 0.0;
    double arc_period = 0.0;
    std::vector<double> s;
    std::vector<double> potential;
    /// FD eigenvalues below -alpha^2/4, ascending.
    std::vector<double> levels;
};

/// Arc length s(x1) of the unshifted curve; a step_shifts tau moves whole
/// segments by `shift` in s.
EffectiveSpectrum effective_spectrum(const CurveSpec& spec, double alpha, const EffectiveOptions& options);

/// k^2/4 over one bump, in arc length, as a sampled well profile (bump_train only).
WellArray1D curvature_wells(const CurveSpec& spec, std::size_t samples = 2049);

struct CouplingRow {
    double alpha = 0.0;
    double eps2d = 0.0;
    double epseff = 0.0;
    double delta = 0.0;
    double ratio = 0.0;
    std::size_t n_cell = 0;
};

struct CouplingOptions {
    /// Fiber resolution: n_cell = max(min_cell, ceil(kappa a / kappa_h)) with kappa ~ alpha/2.
    double kappa_h = 0.1;
    std::size_t min_cell = 32;
    std::size_t steps_per_period = 4000;
};

/// |(eps0_2d + alpha^2/4) - (eps0_eff + alpha^2/4)| for each alpha, with
/// ratio = delta * alpha / ln(alpha).
std::vector<CouplingRow> strong_coupling_compare(const CurveSpec& spec, const std::vector<double>& alpha_list,
                                                 const CouplingOptions& options = {});

/// CSV `alpha,eps2d,epseff,delta,ratio`.
std::string coupling_csv(const std::vector<CouplingRow>& rows);

}  // namespace leaky
