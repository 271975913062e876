#pragma once

// Macdonald functions K0 and K1 on the positive half-line.

namespace leaky::specfun {

inline constexpr double euler_gamma = 0.57721566490153286061;

/// K0(x), relative error below 1e-12 on [1e-8, 700]; 0 once the value underflows.
double bessel_k0(double x);
/// K1(x), same accuracy contract as bessel_k0.
double bessel_k1(double x);

/// exp(x) * K0(x); finite for every x > 0.
double bessel_k0_scaled(double x);
/// exp(x) * K1(x).
double bessel_k1_scaled(double x);

/// K0(x) / K1(x) in (0, 1), evaluated through the scaled functions so that it
/// stays accurate where K0 and K1 themselves underflow.
double k_ratio(double x);

}  // namespace leaky::specfun
