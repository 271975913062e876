#include "leaky/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "leaky/errors.hpp"

namespace leaky::specfun {
namespace {

constexpr double kSeriesSwitch = 2.0;
// Beyond this K_nu(x) is below the smallest subnormal double.
constexpr double kUnderflow = 745.2;
constexpr int kChebTerms = 64;

void check_argument(double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string(name) + ": argument must be positive and finite, got " +
                          std::to_string(x));
    }
}

// Ascending series with the logarithmic term, accurate to rounding for x <= 2.
double k0_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double harmonic = 0.0;
    double i0 = 1.0;
    double tail = 0.0;
    for (int k = 1; k < 40; ++k) {
        term *= q / (static_cast<double>(k) * k);
        harmonic += 1.0 / k;
        i0 += term;
        tail += harmonic * term;
        if (term < 1e-18 * i0) {
            break;
        }
    }
    return -(std::log(0.5 * x) + euler_gamma) * i0 + tail;
}

double k1_series(double x) {
    const double q = 0.25 * x * x;
    // psi(k+1) + psi(k+2) = -2 gamma + H_k + H_{k+1}
    double term = 1.0;  // q^k / (k! (k+1)!)
    double h_k = 0.0;
    double h_k1 = 1.0;
    double i1_sum = term;
    double psi_sum = (-2.0 * euler_gamma + h_k + h_k1) * term;
    for (int k = 1; k < 40; ++k) {
        term *= q / (static_cast<double>(k) * (k + 1));
        h_k += 1.0 / k;
        h_k1 += 1.0 / (k + 1);
        i1_sum += term;
        psi_sum += (-2.0 * euler_gamma + h_k + h_k1) * term;
        if (term < 1e-18 * i1_sum) {
            break;
        }
    }
    const double i1 = 0.5 * x * i1_sum;
    return 1.0 / x + std::log(0.5 * x) * i1 - 0.25 * x * psi_sum;
}

// sqrt(x) e^x K_nu(x) = sqrt(x) * int_0^inf exp(-x (cosh t - 1)) cosh(nu t) dt.
// The integrand is entire and decays doubly exponentially, so the trapezoidal
// rule converges geometrically; the step is scaled with the peak width 1/sqrt(x).
double scaled_by_trapezoid(int nu, double x) {
    const double h = 0.1 / std::sqrt(std::max(x, 1.0));
    const double t_max = std::acosh(1.0 + 46.0 / x);
    double sum = 0.5;  // t = 0 contributes exp(0) cosh(0) / 2
    for (int k = 1;; ++k) {
        const double t = k * h;
        if (t > t_max) {
            break;
        }
        const double s = std::sinh(0.5 * t);
        const double w = std::exp(-2.0 * x * s * s);
        sum += nu == 0 ? w : w * std::cosh(t);
    }
    return std::sqrt(x) * h * sum;
}

// Chebyshev expansion of sqrt(x) e^x K_nu(x) in u = 4/x - 1 on x > 2.
struct ChebTable {
    std::array<double, kChebTerms> k0{};
    std::array<double, kChebTerms> k1{};

    ChebTable() {
        std::array<double, kChebTerms> f0{};
        std::array<double, kChebTerms> f1{};
        for (int j = 0; j < kChebTerms; ++j) {
            const double theta = std::numbers::pi * (j + 0.5) / kChebTerms;
            const double u = std::cos(theta);
            const double x = 4.0 / (u + 1.0);
            f0[j] = scaled_by_trapezoid(0, x);
            f1[j] = scaled_by_trapezoid(1, x);
        }
        for (int k = 0; k < kChebTerms; ++k) {
            double s0 = 0.0;
            double s1 = 0.0;
            for (int j = 0; j < kChebTerms; ++j) {
                const double c = std::cos(std::numbers::pi * k * (j + 0.5) / kChebTerms);
                s0 += f0[j] * c;
                s1 += f1[j] * c;
            }
            k0[k] = 2.0 * s0 / kChebTerms;
            k1[k] = 2.0 * s1 / kChebTerms;
        }
    }
};

const ChebTable& cheb_table() {
    static const ChebTable table;
    return table;
}

double clenshaw(const std::array<double, kChebTerms>& c, double u) {
    double b1 = 0.0;
    double b2 = 0.0;
    for (int k = kChebTerms - 1; k >= 1; --k) {
        const double b0 = 2.0 * u * b1 - b2 + c[k];
        b2 = b1;
        b1 = b0;
    }
    return u * b1 - b2 + 0.5 * c[0];
}

double k0_scaled_large(double x) {
    return clenshaw(cheb_table().k0, 4.0 / x - 1.0) / std::sqrt(x);
}

double k1_scaled_large(double x) {
    return clenshaw(cheb_table().k1, 4.0 / x - 1.0) / std::sqrt(x);
}

}  // namespace

double bessel_k0(double x) {
    check_argument(x, "bessel_k0");
    if (x <= kSeriesSwitch) {
        return k0_series(x);
    }
    if (x > kUnderflow) {
        return 0.0;
    }
    return k0_scaled_large(x) * std::exp(-x);
}

double bessel_k1(double x) {
    check_argument(x, "bessel_k1");
    if (x <= kSeriesSwitch) {
        return k1_series(x);
    }
    if (x > kUnderflow) {
        return 0.0;
    }
    return k1_scaled_large(x) * std::exp(-x);
}

double bessel_k0_scaled(double x) {
    check_argument(x, "bessel_k0_scaled");
    return x <= kSeriesSwitch ? k0_series(x) * std::exp(x) : k0_scaled_large(x);
}

double bessel_k1_scaled(double x) {
    check_argument(x, "bessel_k1_scaled");
    return x <= kSeriesSwitch ? k1_series(x) * std::exp(x) : k1_scaled_large(x);
}

double k_ratio(double x) {
    check_argument(x, "k_ratio");
    if (x <= kSeriesSwitch) {
        return k0_series(x) / k1_series(x);
    }
    return clenshaw(cheb_table().k0, 4.0 / x - 1.0) / clenshaw(cheb_table().k1, 4.0 / x - 1.0);
}

}  // namespace leaky::specfun
