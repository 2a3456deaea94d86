#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "common.hpp"
#include "genusg/modular.hpp"
#include "genusg/quadrature.hpp"

using namespace genusg;
using fixture::rel;

namespace {

const ParameterStencil& stencil() {
  static const ParameterStencil st(Surface(fixture::g2()));
  return st;
}

const SurfaceContext& ctx() { return stencil().base(); }

std::vector<SpElement> samples(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SpElement> out;
  for (int i = 0; i < count; ++i) out.push_back(random_sp(2, 6, rng));
  return out;
}

CMatrix random_siegel(int g, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::MatrixXd X(g, g), R(g, g);
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b) {
      X(a, b) = n(rng);
      R(a, b) = n(rng);
    }
  const Eigen::MatrixXd re = 0.5 * (X + X.transpose());
  const Eigen::MatrixXd im = R * R.transpose() + 0.5 * Eigen::MatrixXd::Identity(g, g);
  CMatrix out(g, g);
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b) out(a, b) = Complex(re(a, b), im(a, b));
  return out;
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("symplectic samples") {
  std::mt19937_64 rng(1);
  const SpElement id = random_sp(2, 0, rng);
  CHECK(id.block() == IMatrix::Identity(4, 4));
  for (const auto& s : samples(50, 2)) {
    CHECK(s.is_symplectic());
    CHECK((s * s.inverse()).block() == IMatrix::Identity(4, 4));
    CHECK((s.inverse() * s).block() == IMatrix::Identity(4, 4));
  }
  for (int g = 1; g <= 3; ++g) CHECK(random_sp(g, 10, rng).is_symplectic());
  const auto all = samples(20, 3);
  CHECK(std::any_of(all.begin(), all.end(), [](const SpElement& s) { return !s.C.isZero(); }));
  IMatrix bad = IMatrix::Identity(4, 4);
  bad(0, 1) = 1;
  CHECK_THROWS_AS(SpElement::from_block(bad), Error);
  CHECK_THROWS_AS(random_sp(2, -1, rng), Error);
}

TEST_CASE("identity frame") {
  const CMatrix Omega = ctx().periods().omega();
  const auto f = transform_frame(Omega, SpElement::identity(2));
  CHECK(max_abs(f.Omega_t - Omega) == 0.0);
  CHECK(max_abs(f.M - CMatrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("N identities over seeded elements") {
  const CMatrix Omega = ctx().periods().omega();
  std::mt19937_64 rng(4);
  for (const auto& sp : samples(20, 5)) {
    for (const CMatrix& W : {Omega, random_siegel(2, rng)}) {
      const auto f = transform_frame(W, sp);
      CHECK(lemma_N_residual(f) < 1e-10);
      CHECK(nc_symmetry_residual(f) < 1e-10);
      CHECK(logdetM_derivative_check(W, sp) < 1e-7);
    }
  }
  for (const auto& sp : samples(5, 6)) {
    if (sp.C.isZero()) continue;
    const auto f = transform_frame(Omega, sp);
    const auto nc = f.NC();
    // Diagonal entry by its own FD oracle.
    const CMatrix C = sp.C.cast<Complex>(), D = sp.D.cast<Complex>();
    const double h = 1e-4;
    CMatrix E = CMatrix::Zero(2, 2);
    E(0, 0) = h;
    const Complex d = std::log((C * (Omega + E) + D).determinant() / (C * (Omega - E) + D).determinant()) / (2 * h);
    CHECK(std::abs(nc(0, 0) - d) < 1e-8 * std::max(1.0, std::abs(d)));
  }
}

TEST_CASE("shears leave omega and s fixed") {
  std::mt19937_64 rng(7);
  const Complex x(0.8, 5.5), y(-2.5, -4.0);
  const Surface& s = ctx().surface();
  for (int i = 0; i < 5; ++i) {
    const auto f = transform_frame(ctx().periods().omega(), random_shear(2, rng));
    CHECK(max_abs(f.N - CMatrix::Identity(2, 2)) == 0.0);
    const auto t = transformed_differentials(ctx(), f, x, y);
    CHECK(t.omega == omega(s, x, y).value);
    CHECK(t.s == projective_connection(s, x).value);
    const auto n = nu_all(s, x);
    for (int a = 0; a < 2; ++a) CHECK(t.nu[a] == n[a]);
  }
}

TEST_CASE("transformed omega is symmetric and nu is normalised on the new alpha cycles") {
  const Surface& s = ctx().surface();
  const CMatrix tau = ctx().tau();
  const Complex x(0.8, 5.5), y(-2.5, -4.0);
  // alpha periods of nu by contour integration around the C_{-a} circles.
  CMatrix alpha(2, 2);
  for (int c = 1; c <= 2; ++c)
    for (int d = 1; d <= 2; ++d)
      alpha(c - 1, d - 1) =
          circle_integral([&](Complex z) { return nu(s, d, z).value; }, s.params().w(-c), 1.1 * s.params().radius(-c))
              .value;
  for (const auto& sp : samples(10, 8)) {
    const auto f = transform_frame(ctx().periods().omega(), sp);
    const auto t1 = transformed_differentials(ctx(), f, x, y), t2 = transformed_differentials(ctx(), f, y, x);
    CHECK(rel(t1.omega, t2.omega) < 1e-9);
    // new alpha_a = sum_c C_ac beta_c + D_ac alpha_c; periods of nu N over them.
    const CMatrix periods = (sp.C.cast<Complex>() * tau + sp.D.cast<Complex>() * alpha) * f.N / kTwoPiI;
    CHECK(max_abs(periods - CMatrix::Identity(2, 2)) < 1e-7);
  }
}

TEST_CASE("log det M expansions of the transformed omega and s") {
  const Complex x(0.8, 5.5), y(-2.5, -4.0);
  for (const auto& sp : samples(20, 9)) {
    const auto f = transform_frame(ctx().periods().omega(), sp);
    const auto r = logdet_consistency(ctx(), f, x, y);
    CHECK(r.omega_residual < 1e-7);
    CHECK(r.s_residual < 1e-7);
  }
}

TEST_CASE("s shift against the finite-difference nabla of log det M") {
  const Complex x(0.8, 5.5), y(-2.5, -4.0);
  const Surface& s = ctx().surface();
  for (const auto& sp : samples(3, 10)) {
    const auto f = transform_frame(ctx().periods().omega(), sp);
    const NablaOperator op(stencil(), x, NablaRealisation::Moduli);
    const Complex nab = op.apply(logdetM_family(sp, f.log_det_M))[0];
    const Complex st = transformed_differentials(ctx(), f, x, y).s;
    const Complex shift = st - projective_connection(s, x).value;
    CHECK(std::abs(shift + 6.0 * nab) < 1e-5 * std::max(std::abs(st), std::abs(shift)));
  }
}

TEST_CASE("automorphy of D_n") {
  const auto F = theta_supplier(EvenLattice::sqrt2(), 2);
  const std::vector<Complex> z1{Complex(0.8, 5.5)}, z2{Complex(0.8, 5.5), Complex(-2.5, -4.0)};

  const auto id = verify_automorphy(ctx(), SpElement::identity(2), 1.0, *F, z1);
  CHECK(id.residual < 1e-12);

  std::mt19937_64 rng(11);
  for (int i = 0; i < 3; ++i) {
    const auto sp = random_shear(2, rng);
    CHECK(verify_automorphy(ctx(), sp, 1.0, *F, z1).residual < 1e-8);
    CHECK(verify_automorphy(ctx(), sp, 1.0, *F, z2).residual < 1e-8);
  }

  double worst = 0.0;
  for (const auto& sp : samples(10, 12)) worst = std::max(worst, verify_automorphy(ctx(), sp, 1.0, *F, z1).residual);
  MESSAGE("n=1 worst automorphy residual " << worst);
  CHECK(worst < 1e-4);

  const auto poly = polynomial_supplier(2, {{1.0, {{{1, 1}, 1}, {{2, 2}, 1}}}, {Complex(0.3, -0.2), {{{1, 2}, 2}}}});
  for (const auto& sp : samples(4, 13)) {
    CHECK(verify_automorphy(ctx(), sp, Complex(0.7, 0.1), *F, z2).residual < 1e-4);
    CHECK(verify_automorphy(ctx(), sp, 2.0, *poly, z2).residual < 1e-4);
  }
  CHECK_THROWS_AS(verify_automorphy(ctx(), SpElement::identity(2), 1.0, *F,
                                    {Complex(0, 5), Complex(1, 5), Complex(2, 5)}),
                  Error);
}
