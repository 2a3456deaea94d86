#include "genusg/differentials.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "genusg/quadrature.hpp"

namespace genusg {

FormValue FormValue::operator+(const FormValue& rhs) const {
  if (weights != rhs.weights) throw Error(ErrorKind::InvalidInput, "adding forms of different weights");
  return {value + rhs.value, weights};
}

FormValue FormValue::operator-(const FormValue& rhs) const {
  if (weights != rhs.weights) throw Error(ErrorKind::InvalidInput, "subtracting forms of different weights");
  return {value - rhs.value, weights};
}

BetaPlan plan_beta_paths(const SchottkyParams& params) {
  constexpr int kAngles = 72;
  constexpr int kSamples = 101;
  BetaPlan plan;
  const auto idx = signed_indices(params.genus());
  for (int a = 1; a <= params.genus(); ++a) {
    const double r = params.radius(a);
    const Complex wa = params.w(a), wna = params.w(-a);
    const MobiusMap ga = generator(params, a).matrix;

    // Images of the other discs under gamma_a sit within |rho_a| / dist(w_a, Delta_c) of w_{-a}.
    double image_radius = 0.0;
    for (int c : idx) {
      if (c == a) continue;
      const double dist = std::abs(params.w(c) - wa) - params.radius(c);
      image_radius = std::max(image_radius, std::abs(params.rho(a)) / dist);
    }
    const double inner = std::max(0.7 * r, 1.1 * image_radius);
    if (inner >= 0.8 * r)
      throw Error(ErrorKind::NumericalGuard,
                  "beta path for handle " + std::to_string(a) + " cannot clear the image discs");

    const double phase0 = std::arg(wna - wa);
    double best = -std::numeric_limits<double>::infinity();
    Complex best_start;
    for (int k = 0; k < kAngles; ++k) {
      const double theta = phase0 + 2.0 * kPi * (k + 0.5) / kAngles;
      const Complex y0 = wa + 1.2 * r * std::polar(1.0, theta);
      const Complex y1 = ga.apply(y0);
      double score = std::numeric_limits<double>::infinity();
      for (int j = 0; j < kSamples; ++j) {
        const Complex p = y0 + (static_cast<double>(j) / (kSamples - 1)) * (y1 - y0);
        for (int c : idx) {
          const double rc = params.radius(c);
          const double d = std::abs(p - params.w(c));
          score = std::min(score, c == -a ? (d - inner) / r : (d - 1.1 * rc) / rc);
        }
      }
      if (score > best) {
        best = score;
        best_start = y0;
      }
    }
    if (!(best > 0.0))
      throw Error(ErrorKind::NumericalGuard,
                  "no straight beta path for handle " + std::to_string(a) + " clears the inflated discs");
    plan.starts.push_back(best_start);
    plan.breaks.push_back(graded_breaks(0.5 * r / std::abs(ga.apply(best_start) - best_start)));
  }
  return plan;
}

Surface::Surface(SchottkyParams params, TruncationPolicy policy, std::optional<BetaPlan> plan)
    : params_(std::move(params)), policy_(policy) {
  if (policy_.max_word_length < 0) throw Error(ErrorKind::InvalidInput, "max_word_length must be >= 0");
  if (!(policy_.tail_tol > 0.0)) throw Error(ErrorKind::InvalidInput, "tail_tol must be positive");
  const ValidationReport report = validate(params_);
  if (!report.pass) {
    const auto& v = report.violations.front();
    throw Error(ErrorKind::Domain, "discs " + std::to_string(v.a) + " and " + std::to_string(v.b) +
                                       " intersect (margin " + std::to_string(v.margin) + ")");
  }
  derived_ = derive_handle_data(params_);
  group_ = GroupTable(params_, policy_.max_word_length);
  plan_ = plan ? std::move(*plan) : plan_beta_paths(params_);
  if (static_cast<int>(plan_.starts.size()) != genus() || plan_.breaks.size() != plan_.starts.size())
    throw Error(ErrorKind::InvalidInput, "beta plan does not match the genus");
  for (int a = 1; a <= genus(); ++a) generators_.push_back(generator(params_, a).matrix);
  scale_ = params_.diameter();
  pole_guard_sq_ = 1e-12 * scale_ * scale_;
}

bool Surface::in_any_disc(Complex z, double inflate) const {
  for (int c : signed_indices(genus()))
    if (std::abs(z - params_.w(c)) < inflate * params_.radius(c)) return true;
  return false;
}

void Surface::check_pole(Complex diff) const {
  if (std::norm(diff) < pole_guard_sq_)
    throw Error(ErrorKind::NumericalGuard, "evaluation point within 1e-6*scale of a pole");
}

LimitPointConfig default_limit_points(const Surface& surface, int N) {
  if (N < 1) throw Error(ErrorKind::InvalidInput, "N must be >= 1");
  if (N == 1) return {{surface.base_point(1)}};
  std::vector<Complex> fixed;
  for (const auto& h : surface.handle_data()) {
    fixed.push_back(h.W);
    fixed.push_back(h.W_neg);
  }
  std::vector<Complex> pts = fixed;
  const auto idx = signed_indices(surface.genus());
  for (int c : idx) {
    const MobiusMap g = generator(surface.params(), c).matrix;
    for (Complex W : fixed) {
      const Complex img = g.apply(W);
      const bool dup = std::any_of(pts.begin(), pts.end(),
                                   [&](Complex p) { return std::abs(p - img) < 1e-9 * surface.scale(); });
      if (!dup) pts.push_back(img);
    }
  }
  const std::size_t need = 2 * static_cast<std::size_t>(N) - 1;
  if (pts.size() < need) throw Error(ErrorKind::InvalidInput, "not enough limit points for this N");
  pts.resize(need);
  return {pts};
}

void check_limit_points(const LimitPointConfig& config, int N) {
  if (config.points.size() != 2 * static_cast<std::size_t>(N) - 1)
    throw Error(ErrorKind::InvalidInput, "limit point configuration needs 2N-1 points");
  for (std::size_t i = 0; i < config.points.size(); ++i)
    for (std::size_t j = i + 1; j < config.points.size(); ++j)
      if (std::abs(config.points[i] - config.points[j]) == 0.0)
        throw Error(ErrorKind::InvalidInput, "limit points must be distinct");
}

static Complex ipow(Complex z, int n) {
  Complex r{1.0};
  for (int i = 0; i < n; ++i) r *= z;
  return r;
}

std::pair<Complex, Complex> psi_N_with_dy(const Surface& s, const LimitPointConfig& config, int N, Complex x,
                                          Complex y) {
  check_limit_points(config, N);
  const auto& A = config.points;
  std::array<Complex, 2> out{};
  s.sum(x, out, false, [&](Complex X, Complex dX, Complex, std::span<Complex> t) {
    s.check_pole(X - y);
    const Complex inv = 1.0 / (X - y);
    if (N == 1) {
      t[0] = (inv - 1.0 / (X - A[0])) * dX;
      t[1] = inv * inv * dX;
      return;
    }
    Complex P{1.0}, logd{0.0};
    for (Complex a : A) {
      // Long words push gamma x onto a limit point; the true term is O(dX^{N-1}), below round-off.
      if (X == a) {
        t[0] = t[1] = 0.0;
        return;
      }
      P *= (y - a) / (X - a);
      logd += 1.0 / (y - a);
    }
    const Complex w = ipow(dX, N);
    t[0] = inv * P * w;
    t[1] = (inv * inv * P + inv * P * logd) * w;
  });
  return {out[0], out[1]};
}

FormValue psi_N(const Surface& s, const LimitPointConfig& config, int N, Complex x, Complex y) {
  return {psi_N_with_dy(s, config, N, x, y).first, {N, 1 - N}};
}

static SeriesDiagnostics omega_series(const Surface& s, Complex x, Complex y, Complex& value) {
  std::array<Complex, 1> out{};
  auto diag = s.sum(x, out, false, [&](Complex X, Complex dX, Complex, std::span<Complex> t) {
    s.check_pole(X - y);
    const Complex inv = 1.0 / (X - y);
    t[0] = inv * inv * dX;
  });
  value = out[0];
  return diag;
}

FormValue omega(const Surface& s, Complex x, Complex y) {
  Complex v;
  omega_series(s, x, y, v);
  return {v, {1, 1}};
}

Complex omega_dy(const Surface& s, Complex x, Complex y) {
  std::array<Complex, 1> out{};
  s.sum(x, out, false, [&](Complex X, Complex dX, Complex, std::span<Complex> t) {
    s.check_pole(X - y);
    const Complex inv = 1.0 / (X - y);
    t[0] = 2.0 * dX * inv * inv * inv;
  });
  return out[0];
}

SeriesDiagnostics omega_diagnostics(const Surface& s, Complex x, Complex y) {
  Complex v;
  return omega_series(s, x, y, v);
}

FormValue omega_N(const Surface& s, int N, Complex x, Complex y) {
  if (N < 1) throw Error(ErrorKind::InvalidInput, "N must be >= 1");
  std::array<Complex, 1> out{};
  s.sum(x, out, false, [&](Complex X, Complex dX, Complex, std::span<Complex> t) {
    s.check_pole(X - y);
    t[0] = ipow(dX / ((X - y) * (X - y)), N);
  });
  return {out[0], {N, N}};
}

FormValue projective_connection(const Surface& s, Complex x) {
  std::array<Complex, 1> out{};
  s.sum(x, out, true, [&](Complex X, Complex dX, Complex, std::span<Complex> t) {
    s.check_pole(X - x);
    const Complex inv = 1.0 / (X - x);
    t[0] = inv * inv * dX;
  });
  return {6.0 * out[0], {2}};
}

namespace {

struct NuEndpoints {
  std::vector<int> a;
  std::vector<Complex> y0, y1;
};

NuEndpoints nu_endpoints(const Surface& s) {
  NuEndpoints e;
  for (int a = 1; a <= s.genus(); ++a) {
    e.a.push_back(a);
    e.y0.push_back(s.base_point(a));
    e.y1.push_back(s.generator_matrix(a).apply(e.y0.back()));
  }
  return e;
}

// Sum of [1/(X - y1) - 1/(X - y0)] dX (or its x-derivative). The poles of the
// identity term at y0 and y1 cancel against gamma_a and gamma_{-a}; those three
// terms are regrouped so the cancellation is exact:
//   -1/(x - y0) + gamma_a'(x)/(gamma_a x - y1)          = -c/(cx + d)      (gamma_a)
//    1/(x - y1) - gamma_{-a}'(x)/(gamma_{-a} x - y0)   =  c'/(c'x + d')   (gamma_{-a})
// d^order/dx^order of dX/(X - y), given 1/(X - y) and the derivatives of X.
inline Complex pole_term(int order, Complex inv, Complex dX, Complex ddX) {
  switch (order) {
    case 0: return inv * dX;
    case 1: return -inv * inv * dX * dX + inv * ddX;
    default: {
      const Complex dddX = 1.5 * ddX * ddX / dX;
      return 2.0 * inv * inv * inv * dX * dX * dX - 3.0 * inv * inv * dX * ddX + inv * dddX;
    }
  }
}

void nu_series(const Surface& s, const NuEndpoints& e, Complex x, std::span<Complex> out, int order) {
  const std::size_t n = e.a.size();
  const auto& mats = s.group().matrices();
  const bool paired = s.group().max_word_length() >= 1;
  std::vector<std::size_t> ia(n), ina(n);
  std::vector<Complex> id_term(n);
  for (std::size_t k = 0; k < n; ++k) {
    ia[k] = 1 + 2 * static_cast<std::size_t>(e.a[k] - 1);
    ina[k] = ia[k] + 1;
    if (!paired) continue;
    const MobiusMap& m = mats[ia[k]];
    const MobiusMap& mn = mats[ina[k]];
    // u = c/(cx + d) satisfies u' = -u^2, u'' = 2u^3.
    const Complex u = m.c() / (m.c() * x + m.d()), un = mn.c() / (mn.c() * x + mn.d());
    id_term[k] = order == 0 ? un - u : order == 1 ? u * u - un * un : 2.0 * (un * un * un - u * u * u);
  }
  s.sum(x, out, false, [&](std::size_t i, Complex X, Complex dX, Complex ddX, std::span<Complex> t) {
    for (std::size_t k = 0; k < n; ++k) {
      if (paired && i == 0) {
        t[k] = id_term[k];
      } else if (paired && i == ia[k]) {
        s.check_pole(X - e.y0[k]);
        t[k] = -pole_term(order, 1.0 / (X - e.y0[k]), dX, ddX);
      } else if (paired && i == ina[k]) {
        s.check_pole(X - e.y1[k]);
        t[k] = pole_term(order, 1.0 / (X - e.y1[k]), dX, ddX);
      } else {
        s.check_pole(X - e.y0[k]);
        s.check_pole(X - e.y1[k]);
        t[k] = pole_term(order, 1.0 / (X - e.y1[k]), dX, ddX) - pole_term(order, 1.0 / (X - e.y0[k]), dX, ddX);
      }
    }
  });
}

}  // namespace

FormValue nu(const Surface& s, int a, Complex x, std::optional<Complex> base) {
  if (a < 1 || a > s.genus()) throw Error(ErrorKind::InvalidInput, "handle index out of range");
  const Complex y0 = base.value_or(s.base_point(a));
  if (s.in_any_disc(y0)) throw Error(ErrorKind::Domain, "nu base point lies inside a disc");
  const NuEndpoints e{{a}, {y0}, {s.generator_matrix(a).apply(y0)}};
  std::array<Complex, 1> out{};
  nu_series(s, e, x, out, 0);
  return {out[0], {1}};
}

std::vector<Complex> nu_all(const Surface& s, Complex x) {
  std::vector<Complex> out(s.genus());
  nu_series(s, nu_endpoints(s), x, out, 0);
  return out;
}

std::vector<Complex> nu_all_dx(const Surface& s, Complex x) {
  std::vector<Complex> out(s.genus());
  nu_series(s, nu_endpoints(s), x, out, 1);
  return out;
}

std::vector<Complex> nu_all_dx2(const Surface& s, Complex x) {
  std::vector<Complex> out(s.genus());
  nu_series(s, nu_endpoints(s), x, out, 2);
  return out;
}

PeriodMatrix period_matrix(const Surface& s, bool check_quadrature) {
  const int g = s.genus();
  PeriodMatrix pm;
  pm.tau = CMatrix::Zero(g, g);
  auto integrand = [&](Complex p, std::vector<Complex>& out) { out = nu_all(s, p); };
  for (int a = 1; a <= g; ++a) {
    const Complex y0 = s.base_point(a);
    const Complex y1 = s.generator_matrix(a).apply(y0);
    const auto& breaks = s.beta_plan().breaks.at(a - 1);
    const auto row = segment_integral(y0, y1, breaks, g, integrand);
    if (check_quadrature) {
      const auto fine = segment_integral(y0, y1, bisect_breaks(breaks), g, integrand);
      for (int b = 0; b < g; ++b)
        pm.quadrature_difference = std::max(pm.quadrature_difference, std::abs(fine[b] - row[b]));
    }
    for (int b = 0; b < g; ++b) pm.tau(a - 1, b) = row[b];
  }
  if (check_quadrature && pm.quadrature_difference > 1e-10 * std::max(1.0, pm.tau.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::NotConverged, "beta-path quadrature did not reach 1e-10");
  for (int a = 0; a < g; ++a)
    for (int b = a + 1; b < g; ++b) pm.asymmetry = std::max(pm.asymmetry, std::abs(pm.tau(a, b) - pm.tau(b, a)));
  if (pm.asymmetry > 1e-6)
    throw Error(ErrorKind::NotConverged, "period matrix asymmetry above 1e-6; increase max_word_length");
  pm.tau = 0.5 * (pm.tau + pm.tau.transpose()).eval();
  if (g == 2 || g == 3)
    for (int a = 1; a <= g; ++a)
      for (int b = a; b <= g; ++b) pm.index_set_K.emplace_back(a, b);
  return pm;
}

bool imag_positive_definite(const CMatrix& omega, double tol) {
  const Eigen::MatrixXd im = omega.imag();
  const Eigen::MatrixXd sym = 0.5 * (im + im.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  return es.eigenvalues().minCoeff() > tol;
}

ThetaFit theta_span(const Surface& s, const LimitPointConfig& config, int a, Complex x, int samples) {
  if (a < 1 || a > s.genus()) throw Error(ErrorKind::InvalidInput, "handle index out of range");
  if (samples < 3) throw Error(ErrorKind::InvalidInput, "theta_span needs at least 3 samples");
  const Complex wa = s.params().w(a);
  const double R = 1.5 * s.params().radius(a);
  const MobiusMap& ga = s.generator_matrix(a);
  Eigen::MatrixXcd V(samples, 3);
  Eigen::VectorXcd rhs(samples);
  for (int j = 0; j < samples; ++j) {
    const Complex y = wa + R * std::polar(1.0, 2.0 * kPi * j / samples + 0.3);
    if (s.in_any_disc(y)) throw Error(ErrorKind::NumericalGuard, "theta_span sample point inside a disc");
    const Complex gy = ga.apply(y);
    rhs(j) = psi_N_with_dy(s, config, 2, x, gy).first / ga.derivative(y) - psi_N_with_dy(s, config, 2, x, y).first;
    Complex p{1.0};
    for (int l = 0; l < 3; ++l) {
      V(j, l) = -p;
      p *= (y - wa);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) < 1e-10 * sv(0))
    throw Error(ErrorKind::NumericalGuard, "theta_span Vandermonde system is ill-conditioned");
  const Eigen::VectorXcd c = svd.solve(rhs);
  ThetaFit fit{};
  for (int l = 0; l < 3; ++l) fit.theta[l] = c(l);
  const double scale = rhs.norm();
  fit.residual = scale > 0.0 ? (V * c - rhs).norm() / scale : 0.0;
  if (fit.residual > 1e-7)
    throw Error(ErrorKind::NotConverged, "theta_span fit residual above 1e-7; increase max_word_length");
  return fit;
}

std::vector<Complex> theta_all(const Surface& s, const LimitPointConfig& config, Complex x, double* max_residual) {
  std::vector<Complex> out;
  double worst = 0.0;
  for (int a = 1; a <= s.genus(); ++a) {
    const ThetaFit f = theta_span(s, config, a, x);
    out.insert(out.end(), f.theta, f.theta + 3);
    worst = std::max(worst, f.residual);
  }
  if (max_residual) *max_residual = worst;
  return out;
}

}  // namespace genusg
