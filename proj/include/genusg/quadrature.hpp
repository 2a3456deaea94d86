#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "genusg/types.hpp"

namespace genusg {

/// Composite 20-point Gauss–Legendre rule on the straight segment [from, to],
/// with panel boundaries at the given parameters 0 = t_0 < ... < t_n = 1.
/// Fixed nodes make the result a smooth function of the endpoints.
/// `f` fills `out` (size `width`) with integrand values at a point.
template <class F>
std::vector<Complex> segment_integral(Complex from, Complex to, const std::vector<double>& breaks, std::size_t width,
                                      F&& f) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  std::vector<Complex> total(width, Complex{0.0}), vals(width);
  const Complex span = to - from;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double h = breaks[p + 1] - breaks[p];
    const double mid = 0.5 * (breaks[p] + breaks[p + 1]);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        if (x[i] == 0.0 && sgn > 0) continue;
        const double t = mid + sgn * x[i] * 0.5 * h;
        f(from + t * span, vals);
        for (std::size_t k = 0; k < width; ++k) total[k] += w[i] * 0.5 * h * vals[k];
      }
    }
  }
  for (auto& v : total) v *= span;
  return total;
}

inline std::vector<double> uniform_breaks(int panels) {
  std::vector<double> b(panels + 1);
  for (int i = 0; i <= panels; ++i) b[i] = static_cast<double>(i) / panels;
  return b;
}

/// Splits every panel in two.
inline std::vector<double> bisect_breaks(const std::vector<double>& breaks) {
  std::vector<double> out{breaks.front()};
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    out.push_back(0.5 * (breaks[i - 1] + breaks[i]));
    out.push_back(breaks[i]);
  }
  return out;
}

/// Panels doubling in length away from both ends, the first of length `first`
/// (as a fraction of the segment), meeting in the middle.
inline std::vector<double> graded_breaks(double first) {
  int per_side = 1;
  while (first * ((1 << per_side) - 1) < 0.5) ++per_side;
  const double unit = 0.5 / ((1 << per_side) - 1);
  std::vector<double> b{0.0};
  double t = 0.0;
  for (int k = 0; k < per_side; ++k) b.push_back(t += unit * (1 << k));
  b.back() = 0.5;
  for (int k = per_side - 1; k >= 0; --k) b.push_back(1.0 - (b[k]));
  b.back() = 1.0;
  return b;
}

struct ContourResult {
  Complex value;
  int points;
  double cauchy_difference;
};

/// Counter-clockwise integral of f(z) dz over the circle |z - centre| = radius.
/// The trapezoid rule is doubled from 2^min_log2 points until successive values
/// agree to `tol` (absolute) or 2^max_log2 points are reached.
inline ContourResult circle_integral(const std::function<Complex(Complex)>& f, Complex centre, double radius,
                                     double tol = 1e-10, int min_log2 = 5, int max_log2 = 14) {
  auto rule = [&](int n) {
    CompensatedSum s;
    for (int k = 0; k < n; ++k) {
      const Complex e = std::polar(1.0, 2.0 * kPi * k / n);
      s.add(f(centre + radius * e) * e);
    }
    return s.value() * Complex(0.0, 2.0 * kPi * radius / n);
  };
  int n = 1 << min_log2;
  Complex prev = rule(n);
  double diff = 0.0;
  while (n < (1 << max_log2)) {
    n *= 2;
    const Complex next = rule(n);
    diff = std::abs(next - prev);
    prev = next;
    if (diff < tol) break;
  }
  if (diff >= tol)
    throw Error(ErrorKind::NotConverged, "circle quadrature did not converge");
  return {prev, n, diff};
}

}  // namespace genusg
