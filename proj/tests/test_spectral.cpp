#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "leaky/errors.hpp"
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

CurveSpec contracted() {
    CurveSpec s = sine(0.5);
    s.tau.terms.push_back(SmoothContraction{0.4, 2.0 * kA});
    return s;
}

}  // namespace

TEST_CASE("threshold of the straight line") {
    for (double alpha : {0.5, 1.0, 2.0}) {
        ThresholdOptions o;
        o.n_cell = 64;
        const Threshold t = find_threshold(sine(0.0), alpha, o);
        CAPTURE(alpha);
        CHECK(t.kappa0 == doctest::Approx(0.5 * alpha).epsilon(2e-5));
        CHECK(t.eps0 == doctest::Approx(-t.kappa0 * t.kappa0));
        CHECK(std::abs(t.mu_at_root - 1.0) < 1e-10);
        CHECK(t.tail_bound <= o.tail_tol);
    }
}

TEST_CASE("bending lowers the threshold and converges in n_cell") {
    ThresholdOptions o;
    const Threshold t32 = find_threshold(sine(0.5), 1.0, o);
    o.n_cell = 64;
    const Threshold t64 = find_threshold(sine(0.5), 1.0, o);
    CHECK(t32.eps0 < -0.25);
    CHECK(std::abs(t64.kappa0 - t32.kappa0) / t64.kappa0 < 1e-4);
    // larger amplitude, deeper threshold
    const Threshold deeper = find_threshold(sine(1.0), 1.0, o);
    CHECK(deeper.eps0 < t64.eps0);
}

TEST_CASE("threshold argument checks") {
    CHECK_THROWS_AS(find_threshold(contracted(), 1.0), ModelError);
    CHECK_THROWS_AS(find_threshold(sine(0.5), -1.0), DomainError);
    ThresholdOptions o;
    o.n_cell = 16;
    CHECK_THROWS_AS(find_threshold(sine(0.5), 20.0, o), NumericalError);
}

TEST_CASE("straight line bands follow theta^2 - alpha^2/4") {
    BandOptions o;
    o.n_theta = 9;
    o.bands = 1;
    o.n_cell = 64;
    const double alpha = 1.5;
    const BandStructure b = band_structure(sine(0.0), alpha, o);
    REQUIRE(b.theta.size() == 9);
    CHECK(b.theta.front() == doctest::Approx(-0.5));
    CHECK(b.theta.back() == doctest::Approx(0.5));
    for (std::size_t t = 0; t < b.theta.size(); ++t) {
        CHECK(b.status[t] == "ok");
        REQUIRE(b.energies[t].size() == 1);
        const double th = b.theta[t];
        CHECK(b.energies[t][0] == doctest::Approx(th * th - 0.25 * alpha * alpha).epsilon(1e-4));
    }
    CHECK(b.band_min(0) == doctest::Approx(-0.25 * alpha * alpha).epsilon(1e-4));
}

TEST_CASE("band structure of a bent curve") {
    BandOptions o;
    o.n_theta = 11;
    o.bands = 2;
    const BandStructure b = band_structure(sine(0.5), 1.0, o);
    const Threshold t = find_threshold(sine(0.5), 1.0);
    const std::size_t mid = 5;
    REQUIRE(!b.energies[mid].empty());
    CHECK(b.energies[mid][0] == doctest::Approx(t.eps0).epsilon(1e-9));
    CHECK(b.band_min(0) == doctest::Approx(t.eps0).epsilon(1e-9));
    for (std::size_t k = 0; k < b.theta.size(); ++k) {
        const std::size_t m = b.theta.size() - 1 - k;
        CHECK(b.theta[k] == -b.theta[m]);
        REQUIRE(b.energies[k].size() == b.energies[m].size());
        for (std::size_t j = 0; j < b.energies[k].size(); ++j) {
            CHECK(b.energies[k][j] == doctest::Approx(b.energies[m][j]).epsilon(1e-9));
            CHECK(b.energies[k][j] >= b.energies[mid][0] - 1e-12);
            if (j > 0) {
                CHECK(b.energies[k][j] >= b.energies[k][j - 1]);
            }
        }
    }
    const std::string csv = band_csv(b);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "theta,band,energy");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 2);
    }
    std::size_t expected = 0;
    for (const auto& e : b.energies) {
        expected += e.size();
    }
    CHECK(rows == expected);
    o.n_theta = 10;
    CHECK_THROWS_AS(band_structure(sine(0.5), 1.0, o), DomainError);
}

TEST_CASE("contraction binds below the threshold") {
    const CurveSpec s = contracted();
    ThresholdOptions to;
    to.n_cell = 16;
    const Threshold t = find_threshold(s.unperturbed(), 2.0, to);
    BoundStateOptions o;
    o.window_W = 24.0 * kA;
    o.n = 768;
    o.refine = false;
    const BoundStateResult r = find_bound_state(s, 2.0, t.kappa0, o);
    REQUIRE(r.found());
    CHECK(r.margin > 0.0);
    CHECK(r.crossing == "plain");
    CHECK(r.kappa_star > r.kappa0);
    CHECK(r.energy < r.eps0);
    CHECK(r.depth == doctest::Approx(r.eps0 - r.energy));
    CHECK(std::abs(r.mu_at_kappa_star - r.target) < 1e-9);
    double norm = 0.0;
    for (double v : r.eigenvector) {
        CHECK(v > 0.0);
        norm += v * v;
    }
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 1; k < r.scan_mu.size(); ++k) {
        CHECK(r.scan_mu[k] < r.scan_mu[k - 1]);
    }

    SUBCASE("reconstructed field against direct summation") {
        const std::vector<Vec2> pts{{0.0, 3.0}, {5.0, -2.0}, {0.0, 20.0}, {70.0, 1.0}};
        const auto psi = reconstruct_eigenfunction(r, s, 2.0, pts);
        for (std::size_t p = 0; p < pts.size(); ++p) {
            double sum = 0.0;
            for (std::size_t j = 0; j < r.grid.size(); ++j) {
                const Vec2 q = geometry::point(s, r.grid[j]);
                const double J = geometry::arc_element(s, r.grid[j]);
                sum += oracle::k0(r.kappa_star * std::hypot(pts[p].x - q.x, pts[p].y - q.y)) * r.eigenvector[j] *
                       std::sqrt(J * r.step);
            }
            CHECK(psi[p] == doctest::Approx(sum / kPi).epsilon(1e-10));
            CHECK(psi[p] > 0.0);
        }
        CHECK(psi[2] < psi[0]);
        const Vec2 node = geometry::point(s, r.grid[10]);
        CHECK_THROWS_AS(reconstruct_eigenfunction(r, s, 2.0, {node}), DomainError);
    }

    SUBCASE("explicit crossing level") {
        BoundStateOptions high = o;
        high.target = r.mu_perturbed + 0.1;
        high.scan_points = 0;
        CHECK(find_bound_state(s, 2.0, t.kappa0, high).status == BoundStatus::inconclusive);
        BoundStateOptions lower = o;
        lower.target = 0.999;
        lower.scan_points = 0;
        const BoundStateResult lr = find_bound_state(s, 2.0, t.kappa0, lower);
        REQUIRE(lr.found());
        CHECK(lr.crossing == "calibrated");
        CHECK(lr.kappa_star > r.kappa_star);
    }
}

TEST_CASE("no deformation, no margin") {
    const CurveSpec s = sine(0.5);
    BoundStateOptions o;
    o.window_W = 12.0 * kA;
    o.n = 384;
    const BoundStateResult r = find_bound_state(s, 2.0, 1.0, o);
    CHECK(r.status == BoundStatus::inconclusive);
    CHECK(r.margin == 0.0);
    CHECK(r.eigenvector.empty());
    CHECK_THROWS_AS(reconstruct_eigenfunction(r, s, 2.0, {{0.0, 1.0}}), DomainError);
    CHECK_THROWS_AS(find_bound_state(s, 2.0, 0.0, o), DomainError);
    CHECK(to_string(BoundStatus::found) == "found");
    CHECK(to_string(BoundStatus::insufficient_resolution) == "insufficient_resolution");
}

TEST_CASE("trial function gap") {
    TrialOptions o;
    o.window_W = 12.0 * kA;
    o.n = 384;
    o.n_cell = 16;
    const CurveSpec s = contracted();
    const double kappa0 = find_threshold(s.unperturbed(), 2.0, ThresholdOptions{16}).kappa0;
    CHECK(trial_function_gap(s.unperturbed(), s.unperturbed(), 2.0, kappa0, 4.0, o) == 0.0);
    const double g4 = trial_function_gap(s, s.unperturbed(), 2.0, kappa0, 4.0, o);
    const double g8 = trial_function_gap(s, s.unperturbed(), 2.0, kappa0, 8.0, o);
    CHECK(g4 > 0.0);
    CHECK(g8 > 0.0);
    CHECK_THROWS_AS(trial_function_gap(s, s, 2.0, kappa0, 4.0, o), ModelError);
    CHECK_THROWS_AS(trial_function_gap(s, s.unperturbed(), 2.0, kappa0, 0.0, o), DomainError);
}
