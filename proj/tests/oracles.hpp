#pragma once
// Reference computations written independently of the library code.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

// Maclaurin series of the inverse error function.
inline double erf_inv_series(double z, int terms = 600) {
  std::vector<double> c(terms, 0.0);
  c[0] = 1.0;
  for (int k = 1; k < terms; ++k)
    for (int m = 0; m < k; ++m) c[k] += c[m] * c[k - 1 - m] / ((m + 1.0) * (2.0 * m + 1.0));
  const double w = std::sqrt(std::numbers::pi) * z / 2.0;
  double sum = 0.0;
  double power = w;
  for (int k = 0; k < terms; ++k) {
    const double term = c[k] / (2.0 * k + 1.0) * power;
    sum += term;
    if (std::abs(term) < 1e-18) break;
    power *= w * w;
  }
  return sum;
}

// Inverse of std::erf by plain bisection.
inline double erf_inv_bisect(double y) {
  double lo = -6.0, hi = 6.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::erf(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline std::uint32_t lof_m(double eps, double delta) {
  const double c = std::sqrt(2.0) * erf_inv_bisect(1.0 - delta);
  const double a = 1.1213 * c / std::log2(1.0 - eps);
  const double b = 1.1213 * c / std::log2(1.0 + eps);
  return static_cast<std::uint32_t>(std::ceil(std::max(a * a, b * b)));
}

inline double lof_estimate(const std::vector<std::uint32_t>& j) {
  double s = 0.0;
  for (auto x : j) s += x - 1.0;
  return 1.2897 * std::pow(2.0, s / j.size());
}

inline double srcs_estimate(double z, double ell, double p) {
  return std::log(z / ell) / std::log(1.0 - p / ell);
}

}  // namespace oracle
