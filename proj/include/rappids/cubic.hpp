#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "rappids/core.hpp"

namespace rappids {

/// Real roots of a polynomial of degree <= 3, without heap allocation.
struct RootSet {
  std::array<double, 3> values{};
  int count = 0;

  void push(double r) { values[count++] = r; }
  const double* begin() const { return values.data(); }
  const double* end() const { return values.data() + count; }
  double operator[](int i) const { return values[i]; }
  void sort() { std::sort(values.begin(), values.begin() + count); }
};

namespace detail {

inline double eval_cubic(double a3, double a2, double a1, double a0, double t) {
  return ((a3 * t + a2) * t + a1) * t + a0;
}

inline double polish_root(double a3, double a2, double a1, double a0, double t) {
  for (int i = 0; i < 2; ++i) {
    const double f = eval_cubic(a3, a2, a1, a0, t);
    const double df = (3 * a3 * t + 2 * a2) * t + a1;
    if (std::abs(df) < 1e-300) break;
    const double step = f / df;
    if (!std::isfinite(step)) break;
    t -= step;
  }
  return t;
}

}  // namespace detail

/// All real roots of a3 t^3 + a2 t^2 + a1 t + a0 = 0, ascending.
/// Degenerate leading coefficients fall back to the quadratic/linear solve.
/// Closed form (trigonometric for three real roots, Cardano otherwise) with
/// one Newton polish pass per root.
inline RootSet solve_cubic(double a3, double a2, double a1, double a0) {
  RootSet roots;
  if (a3 == 0.0 && a2 == 0.0 && a1 == 0.0) {
    if (a0 == 0.0) throw AllCoefficientsZero();
    return roots;  // nonzero constant: no roots
  }
  if (a3 == 0.0) {
    if (a2 == 0.0) {
      roots.push(-a0 / a1);
      return roots;
    }
    // quadratic, numerically stable split
    const double disc = a1 * a1 - 4 * a2 * a0;
    if (disc < 0) return roots;
    if (disc == 0) {
      roots.push(-a1 / (2 * a2));
      return roots;
    }
    const double q = -0.5 * (a1 + std::copysign(std::sqrt(disc), a1));
    roots.push(q / a2);
    roots.push(q == 0.0 ? -a1 / (2 * a2) : a0 / q);
    roots.sort();
    return roots;
  }

  const double b = a2 / a3;
  const double c = a1 / a3;
  const double d = a0 / a3;
  const double q = (b * b - 3 * c) / 9.0;
  const double r = (2 * b * b * b - 9 * b * c + 27 * d) / 54.0;
  const double r2 = r * r;
  const double q3 = q * q * q;
  if (r2 < q3) {
    // three real roots
    const double theta = std::acos(std::clamp(r / std::sqrt(q3), -1.0, 1.0));
    const double m = -2.0 * std::sqrt(q);
    roots.push(m * std::cos(theta / 3.0) - b / 3.0);
    roots.push(m * std::cos((theta + 2.0 * M_PI) / 3.0) - b / 3.0);
    roots.push(m * std::cos((theta - 2.0 * M_PI) / 3.0) - b / 3.0);
  } else {
    const double a = -std::copysign(std::cbrt(std::abs(r) + std::sqrt(r2 - q3)), r);
    const double bb = (a == 0.0) ? 0.0 : q / a;
    roots.push(a + bb - b / 3.0);
  }
  for (int i = 0; i < roots.count; ++i) {
    roots.values[i] = detail::polish_root(a3, a2, a1, a0, roots.values[i]);
  }
  roots.sort();
  return roots;
}

}  // namespace rappids
