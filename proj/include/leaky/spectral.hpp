#pragma once

// Threshold, band structure and bound states of leaky curves, all obtained
// from crossings mu(kappa) = 1 of Birman-Schwinger eigenvalues.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "leaky/bsop.hpp"
#include "leaky/geometry.hpp"

namespace leaky {

struct ThresholdOptions {
    std::size_t n_cell = 32;
    std::size_t n_images = 0;
    double tail_tol = 1e-12;
    DiagonalRule diagonal = DiagonalRule::zeta_corrected;
    double tol = 1e-12;
};

struct Threshold {
    double kappa0 = 0.0;
    double eps0 = 0.0;
    std::size_t n_cell = 0;
    std::size_t n_images = 0;
    double tail_bound = 0.0;
    /// mu_max of the theta = 0 fiber at kappa0.
    double mu_at_root = 0.0;
};

/// Lowest energy of the theta = 0 fiber: mu_max(kappa0) = 1.
Threshold find_threshold(const CurveSpec& spec, double alpha, const ThresholdOptions& options = {});

struct BandOptions {
    std::size_t n_theta = 17;
    std::size_t bands = 2;
    std::size_t n_cell = 32;
    double tail_tol = 1e-12;
    /// Smallest rate probed, as a fraction of alpha/2; bands above -(floor)^2 are not resolved.
    double kappa_floor = 0.05;
    double tol = 1e-12;
    std::size_t threads = 0;
};

struct BandStructure {
    double alpha = 0.0;
    double period = 0.0;
    std::size_t n_cell = 0;
    std::vector<double> theta;
    /// energies[t][j] = -kappa_j(theta_t)^2, j = 0 is the lowest band.
    std::vector<std::vector<double>> energies;
    /// "ok" or the error raised while solving at that theta.
    std::vector<std::string> status;

    double band_min(std::size_t band) const;
    double band_max(std::size_t band) const;
};

/// theta grid: n_theta equispaced points on [-pi/a, pi/a] (endpoints included).
BandStructure band_structure(const CurveSpec& spec, double alpha, const BandOptions& options = {});

enum class BoundStatus { found, inconclusive, insufficient_resolution };

std::string to_string(BoundStatus status);

struct BoundStateOptions {
    double window_W = 0.0;
    std::size_t n = 0;
    LineOptions line;
    double margin_tol = 1e-6;
    double root_tol = 1e-12;
    /// Check the margin once more at (2W, 2n) and at (W, 2n).
    bool refine = true;
    std::size_t scan_points = 8;
    std::size_t max_expansions = 20;
    /// Crossing level; unset picks 1 when mu(kappa0) > 1, else mu_reference.
    std::optional<double> target;
};

struct MarginSample {
    double window_W = 0.0;
    std::size_t n = 0;
    double mu_reference = 0.0;
    double mu_perturbed = 0.0;
    double margin = 0.0;
};

struct BoundStateResult {
    BoundStatus status = BoundStatus::inconclusive;
    double kappa0 = 0.0;
    double eps0 = 0.0;
    double window_W = 0.0;
    std::size_t n = 0;
    double margin = 0.0;
    double mu_reference = 0.0;
    double mu_perturbed = 0.0;
    /// "plain": mu(kappa*) = 1. "calibrated": mu(kappa*) = mu_reference, used
    /// when the window is too short for the perturbed eigenvalue to exceed 1.
    std::string crossing = "none";
    double target = 1.0;
    double kappa_star = 0.0;
    double energy = 0.0;
    double depth = 0.0;
    double mu_at_kappa_star = 0.0;
    std::vector<double> grid;
    std::vector<double> arc_weights;
    double step = 0.0;
    /// Top BS eigenvector at kappa*, unit l2 norm, positive sum.
    std::vector<double> eigenvector;
    std::vector<MarginSample> refinements;
    std::vector<double> scan_kappa;
    std::vector<double> scan_mu;

    bool found() const { return status == BoundStatus::found; }
};

BoundStateResult find_bound_state(const CurveSpec& spec, double alpha, double kappa0,
                                  const BoundStateOptions& options);

struct TrialOptions {
    double window_W = 0.0;
    std::size_t n = 0;
    std::size_t n_cell = 32;
    double tail_tol = 1e-12;
};

/// h * sum_ij u_i [M_tau - M_0]_ij u_j with u = g_n phi0, g_n(x) = n^2/(n^2 + x^2),
/// both matrices in the reference frame of spec_0.
double trial_function_gap(const CurveSpec& spec_tau, const CurveSpec& spec_0, double alpha, double kappa0,
                          double n_moll, const TrialOptions& options);

/// psi(x) = (alpha/2pi) sum_j K0(kappa* |x - Gamma(x_j)|) phi_j J_j h with
/// phi_j = v_j / sqrt(h J_j). Points closer than h/2 to a node are rejected.
std::vector<double> reconstruct_eigenfunction(const BoundStateResult& result, const CurveSpec& spec, double alpha,
                                              const std::vector<Vec2>& points);

/// CSV `theta,band,energy`, one row per resolved band value.
std::string band_csv(const BandStructure& bands);

}  // namespace leaky
