#include <cmath>
#include <vector>

#include "doctest.h"
#include "leaky/errors.hpp"
#include "leaky/specfun.hpp"
#include "oracles.hpp"

using namespace leaky::specfun;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> x;
    for (int i = 0; i < n; ++i) {
        x.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    }
    return x;
}

double rel(double a, double b) {
    return std::abs(a - b) / std::abs(b);
}

}  // namespace

TEST_CASE("K0 and K1 against quadrature of the integral representation") {
    for (double x : log_grid(0.01, 100.0, 40)) {
        CAPTURE(x);
        CHECK(rel(bessel_k0(x), oracle::k0(x)) < 1e-12);
        CHECK(rel(bessel_k1(x), oracle::k1(x)) < 1e-12);
        CHECK(rel(bessel_k0_scaled(x), oracle::k0_scaled(x)) < 1e-12);
        CHECK(rel(bessel_k1_scaled(x), oracle::k1_scaled(x)) < 1e-12);
    }
}

TEST_CASE("K0 and K1 at x = 1") {
    CHECK(bessel_k0(1.0) == doctest::Approx(0.421024438240708).epsilon(1e-14));
    CHECK(bessel_k1(1.0) == doctest::Approx(0.601907230197235).epsilon(1e-14));
    CHECK(k_ratio(1.0) == doctest::Approx(oracle::k0(1.0) / oracle::k1(1.0)).epsilon(1e-13));
}

TEST_CASE("small argument behaviour") {
    // K0(x) = -ln(x/2) - gamma + O(x^2 ln x), x K1(x) = 1 + O(x^2 ln x)
    for (double x : {1e-3, 1e-5, 1e-7}) {
        const double lead = -std::log(0.5 * x) - euler_gamma;
        const double next = 0.25 * x * x * (lead + 1.0);
        CHECK(std::abs(bessel_k0(x) - lead - next) < 1e-12);
        CHECK(std::abs(x * bessel_k1(x) - 1.0) < 10.0 * x * x * std::abs(std::log(x)));
    }
}

TEST_CASE("ordering and monotonicity") {
    CHECK(bessel_k0(2.0) < bessel_k0(1.0));
    for (double x : {0.1, 1.0, 10.0}) {
        CHECK(bessel_k1(x) > bessel_k0(x));
    }
    const auto xs = log_grid(1e-6, 600.0, 400);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        CHECK(bessel_k0(xs[i]) < bessel_k0(xs[i - 1]));
        CHECK(bessel_k1(xs[i]) < bessel_k1(xs[i - 1]));
        CHECK(bessel_k0(xs[i]) > 0.0);
        CHECK(bessel_k1(xs[i]) > 0.0);
        const double r = k_ratio(xs[i]);
        CHECK(r > 0.0);
        CHECK(r < 1.0);
    }
}

TEST_CASE("derivative of K0 is -K1") {
    for (double x : log_grid(0.01, 100.0, 40)) {
        const double h = 1e-5 * x;
        const double d = (bessel_k0(x + h) - bessel_k0(x - h)) / (2.0 * h);
        CAPTURE(x);
        CHECK(rel(d, -bessel_k1(x)) < 1e-6);
    }
}

TEST_CASE("ratio at large argument") {
    const double r = k_ratio(500.0);
    CHECK(r > 0.995);
    CHECK(r < 1.0);
    // K0/K1 = 1 - 1/(2x) + 3/(8x^2) + ...
    CHECK(k_ratio(700.0) == doctest::Approx(1.0 - 1.0 / 1400.0 + 3.0 / (8.0 * 700.0 * 700.0)).epsilon(1e-8));
    CHECK(std::isfinite(k_ratio(700.0)));
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(bessel_k0(0.0), leaky::DomainError);
    CHECK_THROWS_AS(bessel_k1(-1.0), leaky::DomainError);
    CHECK_THROWS_AS(k_ratio(std::nan("")), leaky::DomainError);
}
