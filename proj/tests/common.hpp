#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "genusg/schottky.hpp"

namespace fixture {

using genusg::Complex;

// Reference surface: g = 2, w = (-3, -1, 1, 3), rho = 0.02.
inline genusg::SchottkyParams g2() {
  return genusg::SchottkyParams({{{-3.0, 0.0}, {-1.0, 0.0}, {0.02, 0.0}}, {{1.0, 0.0}, {3.0, 0.0}, {0.02, 0.0}}});
}

inline std::vector<Complex> circle_points(std::uint64_t seed, int n, double radius = 6.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  std::vector<Complex> out;
  for (int i = 0; i < n; ++i) out.push_back(std::polar(radius, u(rng)));
  return out;
}

inline double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fixture
