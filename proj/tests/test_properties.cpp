// Structural properties checked over families of inputs.

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "leaky/bsop.hpp"
#include "leaky/oned.hpp"
#include "leaky/spectral.hpp"
#include "oracles.hpp"

using namespace leaky;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kA = 2.0 * kPi;

CurveSpec sine(double amp) {
    CurveSpec s;
    s.period_a = kA;
    s.gamma = SineProfile{amp};
    return s;
}

CurveSpec contracted(double depth) {
    CurveSpec s = sine(0.5);
    s.tau.terms.push_back(SmoothContraction{depth, 2.0 * kA});
    return s;
}

WellArray1D shifted_squares() {
    WellArray1D arr;
    arr.spacing = 4.0;
    arr.well.depth = 1.0;
    arr.well.width = 2.0;
    arr.shifts[0] = 1.2;
    arr.shifts[2] = -0.4;
    return arr;
}

double uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> kappa_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g;
    for (std::size_t k = 0; k < n; ++k) {
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n - 1)));
    }
    return g;
}

template <class Build>
void check_decreasing(Build build, const std::vector<double>& grid) {
    double prev = std::numeric_limits<double>::infinity();
    for (double kappa : grid) {
        const double mu = mu_max(build(kappa));
        CAPTURE(kappa);
        CHECK(mu > 0.0);
        CHECK(mu < prev);
        prev = mu;
    }
}

}  // namespace

TEST_CASE("mu_max decreases strictly in kappa for every matrix family") {
    SUBCASE("line") {
        check_decreasing([](double k) { return build_line_bs(contracted(0.4), 2.0, k, 12.0 * kA, 384); },
                         kappa_grid(0.2, 1.2, 10));
    }
    SUBCASE("fiber") {
        FiberConfig fc;
        fc.theta = 0.2;
        check_decreasing([&](double k) { return build_fiber_bs(sine(0.5), 1.0, k, fc, 32); },
                         kappa_grid(0.05, 1.5, 10));
    }
    SUBCASE("one-dimensional") {
        check_decreasing([](double k) { return build_1d_bs(shifted_squares(), k, 40.0, 16); },
                         kappa_grid(0.1, 5.0, 10));
    }
}

TEST_CASE("mu_max vanishes as kappa grows") {
    const double k0 = find_threshold(sine(0.5), 1.0).kappa0;
    const double m0 = mu_max(build_fiber_bs(sine(0.5), 1.0, k0, FiberConfig{}, 640));
    const double m50 = mu_max(build_fiber_bs(sine(0.5), 1.0, 50.0 * k0, FiberConfig{}, 640));
    CHECK(m50 < 0.05 * m0);
    const WellArray1D arr = shifted_squares();
    CHECK(mu_max(build_1d_bs(arr, 25.0, 20.0, 64)) < 0.05 * mu_max(build_1d_bs(arr, 0.5, 20.0, 64)));
}

TEST_CASE("top eigenpairs reproduce their Rayleigh quotients") {
    std::mt19937_64 rng(5);
    for (std::size_t n : {5u, 40u, 90u}) {
        SymMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                m.set(i, j, 2.0 * uniform(rng) - 1.0);
            }
        }
        const auto top = sym_eig_top(m, 4);
        for (std::size_t k = 0; k < top.size(); ++k) {
            if (k > 0) {
                CHECK(top[k].value <= top[k - 1].value);
            }
            double num = 0.0;
            double den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    row += m(i, j) * top[k].vector[j];
                }
                num += top[k].vector[i] * row;
                den += top[k].vector[i] * top[k].vector[i];
            }
            CHECK(std::abs(num / den - top[k].value) < 1e-10);
        }
    }
}

TEST_CASE("roots stay inside their bracket") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        const double c = 4.0 * uniform(rng) - 2.0;
        auto f = [c](double x) { return std::tanh(3.0 * (x - c)) + 0.1 * (x - c); };
        const Bracket b = make_bracket(f, -3.0, 3.0);
        const double r = brent_root(f, b);
        CHECK(r >= b.lo);
        CHECK(r <= b.hi);
        CHECK(std::abs(r - c) < 1e-9);
    }
}

TEST_CASE("band values lie below zero and below theta^2") {
    BandOptions o;
    o.n_theta = 9;
    const BandStructure b = band_structure(sine(0.8), 1.0, o);
    for (std::size_t t = 0; t < b.theta.size(); ++t) {
        for (double e : b.energies[t]) {
            CHECK(e < std::min(0.0, b.theta[t] * b.theta[t]));
        }
    }
}

TEST_CASE("periodic reference at the threshold approximates the essential supremum") {
    const CurveSpec s = contracted(0.4);
    const double k0 = find_threshold(s.unperturbed(), 2.0, ThresholdOptions{16}).kappa0;
    const double mu = mu_max(build_line_bs(s.unperturbed(), 2.0, k0, 24.0 * kA, 768));
    CHECK(mu > 0.95);
    CHECK(mu < 1.02);
}

TEST_CASE("far from the deformation the matrix is unchanged") {
    const CurveSpec s = contracted(0.4);
    const double W = 12.0 * kA;
    const BSMatrix m = build_line_bs(s, 2.0, 1.0, W, 384);
    const BSMatrix m0 = build_line_bs(s.unperturbed(), 2.0, 1.0, W, 384);
    std::vector<std::size_t> far;
    for (std::size_t i = 0; i < m.grid.size(); ++i) {
        if (m.grid[i] > 3.0 * kA) {
            far.push_back(i);
        }
    }
    REQUIRE(far.size() > 50);
    SymMatrix sub(far.size());
    SymMatrix sub0(far.size());
    for (std::size_t i = 0; i < far.size(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            sub.set(i, j, m.matrix(far[i], far[j]));
            sub0.set(i, j, m0.matrix(far[i], far[j]));
        }
    }
    CHECK(std::abs(oracle::eigenvalues(sub).front() - oracle::eigenvalues(sub0).front()) < 1e-3);
}

TEST_CASE("deeper contraction binds at least as strongly") {
    const double k0 = find_threshold(sine(0.5), 2.0, ThresholdOptions{16}).kappa0;
    BoundStateOptions o;
    o.window_W = 24.0 * kA;
    o.n = 768;
    o.refine = false;
    o.scan_points = 0;
    // common crossing level: the periodic reference does not depend on d
    o.target = mu_max(build_line_bs(sine(0.5), 2.0, k0, o.window_W, o.n));
    double prev = k0;
    for (double d : {0.2, 0.4, 0.8}) {
        const BoundStateResult r = find_bound_state(contracted(d), 2.0, k0, o);
        CAPTURE(d);
        REQUIRE(r.found());
        CHECK(r.kappa_star >= prev);
        CHECK(std::abs(r.mu_at_kappa_star - *o.target) <= 1e-8);
        prev = r.kappa_star;
    }
}

TEST_CASE("mirror-symmetric curve gives a mirror-symmetric field") {
    // even gamma, odd tau + d/2: the curve is symmetric about x1 = -d/2
    CurveSpec s;
    s.period_a = kA;
    s.gamma = BumpTrainProfile{1.0, 1.5, 6};
    const double d = 0.4;
    s.tau.terms.push_back(SmoothContraction{d, 2.0 * kA});
    const double k0 = find_threshold(s.unperturbed(), 2.0, ThresholdOptions{64}).kappa0;
    BoundStateOptions o;
    o.window_W = 24.0 * kA;
    o.n = 1536;
    o.refine = false;
    o.scan_points = 0;
    const BoundStateResult r = find_bound_state(s, 2.0, k0, o);
    REQUIRE(r.found());
    const double c = -0.5 * d;
    std::vector<Vec2> pts;
    for (double x : {0.3, 2.0, 7.5, 30.0}) {
        for (double y : {-2.0, 2.5, 4.0}) {
            pts.push_back({c + x, y});
            pts.push_back({c - x, y});
        }
    }
    const auto psi = reconstruct_eigenfunction(r, s, 2.0, pts);
    for (std::size_t k = 0; k < psi.size(); k += 2) {
        CHECK(std::abs(psi[k] - psi[k + 1]) <= 1e-6 * std::abs(psi[k]));
    }
}

TEST_CASE("transfer matrices conserve the Wronskian") {
    const WellArray1D arr = shifted_squares().unshifted();
    WellArray1D bump = arr;
    bump.well.shape = WellShape::smooth_bump;
    for (const auto& a : {arr, bump}) {
        for (int k = 0; k <= 20; ++k) {
            const double E = -1.0 + 1.5 * k / 20.0;
            CHECK(std::abs(monodromy(a, E).det - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("effective potential sits at -alpha^2/4 on straight pieces") {
    CurveSpec s;
    s.period_a = kA;
    s.gamma = BumpTrainProfile{1.0, 1.5, 6};
    EffectiveOptions o;
    o.S_half = 30.0;
    o.n = 3000;
    const double alpha = 8.0;
    const EffectiveSpectrum e = effective_spectrum(s, alpha, o);
    std::size_t flat = 0;
    std::size_t curved = 0;
    for (double v : e.potential) {
        CHECK(v <= -0.25 * alpha * alpha);
        if (v == -0.25 * alpha * alpha) {
            ++flat;
        } else {
            ++curved;
        }
    }
    CHECK(flat > 0);
    CHECK(curved > 0);
}
