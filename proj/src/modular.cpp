#include "genusg/modular.hpp"

#include <algorithm>
#include <cmath>

namespace genusg {

namespace {

IMatrix I(int g) { return IMatrix::Identity(g, g); }
IMatrix Z(int g) { return IMatrix::Zero(g, g); }

bool symmetric(const IMatrix& m) { return m == m.transpose(); }

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Symmetric unit perturbation of the (a, b) entry.
CMatrix unit_pair(int g, int a, int b) {
  CMatrix e = CMatrix::Zero(g, g);
  e(a, b) = 1.0;
  e(b, a) = 1.0;
  return e;
}

CVector row(const std::vector<Complex>& v) { return Eigen::Map<const CVector>(v.data(), v.size()); }

}  // namespace

IMatrix SpElement::block() const {
  const int g = genus();
  IMatrix m(2 * g, 2 * g);
  m << A, B, C, D;
  return m;
}

SpElement SpElement::inverse() const { return {D.transpose(), -B.transpose(), -C.transpose(), A.transpose()}; }

SpElement SpElement::operator*(const SpElement& o) const {
  return {A * o.A + B * o.C, A * o.B + B * o.D, C * o.A + D * o.C, C * o.B + D * o.D};
}

bool SpElement::is_symplectic() const {
  const int g = genus();
  return A * D.transpose() - B * C.transpose() == I(g) && A.transpose() * D - C.transpose() * B == I(g) &&
         symmetric(A * B.transpose()) && symmetric(A.transpose() * C) && symmetric(D * C.transpose()) &&
         symmetric(D.transpose() * B);
}

SpElement SpElement::identity(int g) { return {I(g), Z(g), Z(g), I(g)}; }

SpElement SpElement::from_block(const IMatrix& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0) throw Error(ErrorKind::InvalidInput, "Sp element must be 2g x 2g");
  const int g = static_cast<int>(m.rows() / 2);
  SpElement s{m.topLeftCorner(g, g), m.topRightCorner(g, g), m.bottomLeftCorner(g, g), m.bottomRightCorner(g, g)};
  if (!s.is_symplectic()) throw Error(ErrorKind::InvalidInput, "matrix is not symplectic");
  return s;
}

SpElement SpElement::shear(const IMatrix& B) {
  if (!symmetric(B)) throw Error(ErrorKind::InvalidInput, "shear block must be symmetric");
  const int g = static_cast<int>(B.rows());
  return {I(g), B, Z(g), I(g)};
}

SpElement SpElement::inversion(int g) { return {Z(g), -I(g), I(g), Z(g)}; }

namespace {

IMatrix random_symmetric(int g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> entry(-1, 1);
  IMatrix B = Z(g);
  while (B.isZero())
    for (int a = 0; a < g; ++a)
      for (int b = a; b < g; ++b) B(a, b) = B(b, a) = entry(rng);
  return B;
}

}  // namespace

SpElement random_sp(int g, int word_length, std::mt19937_64& rng) {
  if (g < 1 || word_length < 0) throw Error(ErrorKind::InvalidInput, "random_sp needs g >= 1 and word_length >= 0");
  SpElement s = SpElement::identity(g);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int k = 0; k < word_length; ++k) {
    switch (pick(rng)) {
      case 0: s = s * SpElement::shear(random_symmetric(g, rng)); break;
      case 1: s = s * SpElement::shear(random_symmetric(g, rng)).inverse(); break;
      case 2: s = s * SpElement::inversion(g); break;
      default: s = s * SpElement::inversion(g).inverse(); break;
    }
  }
  if (!s.is_symplectic()) throw Error(ErrorKind::NumericalGuard, "integer overflow in random_sp");
  return s;
}

SpElement random_shear(int g, std::mt19937_64& rng) { return SpElement::shear(random_symmetric(g, rng)); }

ModularFrame transform_frame(const CMatrix& Omega, const SpElement& sp) {
  const int g = sp.genus();
  if (Omega.rows() != g || Omega.cols() != g) throw Error(ErrorKind::InvalidInput, "Omega and Sp element disagree on g");
  ModularFrame f;
  f.sp = sp;
  f.Omega = Omega;
  f.M = sp.C.cast<Complex>() * Omega + sp.D.cast<Complex>();
  const Eigen::FullPivLU<CMatrix> lu(f.M);
  if (!lu.isInvertible() || lu.rcond() < 1e-12)
    throw Error(ErrorKind::NumericalGuard, "C Omega + D is singular for this element");
  f.N = lu.inverse();
  f.Omega_t = (sp.A.cast<Complex>() * Omega + sp.B.cast<Complex>()) * f.N;
  f.log_det_M = std::log(lu.determinant());

  const double scale = std::max(1.0, max_abs(f.Omega_t));
  if (max_abs(f.Omega_t - f.Omega_t.transpose()) > 1e-9 * scale)
    throw Error(ErrorKind::NumericalGuard, "transformed period matrix is not symmetric");
  const CMatrix sym = 0.5 * (f.Omega_t + f.Omega_t.transpose());
  if (!imag_positive_definite(sym, 1e-9))
    throw Error(ErrorKind::NumericalGuard, "transformed period matrix has indefinite imaginary part");
  if (max_abs(f.N * f.M - CMatrix::Identity(g, g)) > 1e-12 * std::max(1.0, max_abs(f.N) * max_abs(f.M)))
    throw Error(ErrorKind::NumericalGuard, "N M differs from the identity");
  return f;
}

double lemma_N_residual(const ModularFrame& f) {
  const CMatrix rhs = f.sp.A.transpose().cast<Complex>() - f.sp.C.transpose().cast<Complex>() * f.Omega_t;
  return max_abs(f.N - rhs) / std::max(1.0, max_abs(f.N));
}

double nc_symmetry_residual(const ModularFrame& f) {
  const CMatrix nc = f.NC();
  return max_abs(nc - nc.transpose()) / std::max(1.0, max_abs(nc));
}

CMatrix dlogdetM_dOmega(const ModularFrame& f) {
  const int g = f.sp.genus();
  const CMatrix nc = f.NC();
  CMatrix out = CMatrix::Zero(g, g);
  for (int a = 0; a < g; ++a)
    for (int b = a; b < g; ++b) out(a, b) = out(b, a) = (nc * unit_pair(g, a, b)).trace();
  return out;
}

double logdetM_derivative_check(const CMatrix& Omega, const SpElement& sp, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidInput, "step must be positive");
  const ModularFrame f = transform_frame(Omega, sp);
  const int g = sp.genus();
  const CMatrix C = sp.C.cast<Complex>(), D = sp.D.cast<Complex>();
  const Complex det0 = f.M.determinant();
  const CMatrix nc = f.NC();
  double worst = 0.0;
  for (int a = 0; a < g; ++a)
    for (int b = a; b < g; ++b) {
      const CMatrix E = unit_pair(g, a, b);
      auto L = [&](double t) {
        const Complex det = (C * (Omega + t * E) + D).determinant();
        if (std::abs(det) < 1e-300) throw Error(ErrorKind::NumericalGuard, "det M vanishes inside the FD stencil");
        return std::log(det / det0);
      };
      auto central = [&](double h) { return (L(h) - L(-h)) / (2.0 * h); };
      const Complex d = (4.0 * central(step / 2.0) - central(step)) / 3.0;
      const double k = a == b ? 1.0 : 0.5;
      worst = std::max(worst, std::abs(nc(a, b) - k * d) / std::max(1.0, std::abs(nc(a, b))));
    }
  return worst;
}

TransformedDifferentials transformed_differentials(const SurfaceContext& ctx, const ModularFrame& f, Complex x,
                                                   Complex y) {
  const Surface& s = ctx.surface();
  const CVector nx = row(nu_all(s, x)), ny = row(nu_all(s, y));
  const CMatrix nc = f.NC();
  TransformedDifferentials t;
  const CVector nt = f.N.transpose() * nx;
  t.nu.assign(nt.data(), nt.data() + nt.size());
  t.omega = omega(s, x, y).value - (nx.transpose() * nc * ny)(0, 0) / kTwoPiI;
  t.s = projective_connection(s, x).value - 6.0 * (nx.transpose() * nc * nx)(0, 0) / kTwoPiI;
  return t;
}

LogDetConsistency logdet_consistency(const SurfaceContext& ctx, const ModularFrame& f, Complex x, Complex y) {
  const Surface& s = ctx.surface();
  const int g = s.genus();
  const auto nx = nu_all(s, x), ny = nu_all(s, y);
  const CMatrix dL = dlogdetM_dOmega(f) / kTwoPiI;
  Complex dom = 0.0, ds = 0.0;
  for (int a = 0; a < g; ++a)
    for (int b = a; b < g; ++b) {
      dom += 0.5 * (nx[a] * ny[b] + nx[b] * ny[a]) * dL(a, b);
      ds += nx[a] * nx[b] * dL(a, b);
    }
  const auto t = transformed_differentials(ctx, f, x, y);
  const Complex om = omega(s, x, y).value - dom;
  const Complex sm = projective_connection(s, x).value - 6.0 * ds;
  return {std::abs(t.omega - om) / std::abs(t.omega), std::abs(t.s - sm) / std::abs(t.s)};
}

SurfaceFamily logdetM_family(const SpElement& sp, Complex base_value) {
  return [sp, base_value](const SurfaceContext& ctx) {
    const CMatrix M = sp.C.cast<Complex>() * ctx.periods().omega() + sp.D.cast<Complex>();
    return std::vector<Complex>{base_value + std::log(M.determinant() / std::exp(base_value))};
  };
}

GraphFrame transformed_frame(const SurfaceContext& ctx, const ModularFrame& f, Complex c,
                             const std::vector<Complex>& zs, const ModuliFunction& F) {
  const int n = static_cast<int>(zs.size());
  if (n > 2) throw Error(ErrorKind::InvalidInput, "transformed frames support n <= 2");
  const Surface& s = ctx.surface();
  const int g = s.genus();
  const auto& K = ctx.periods().index_set_K;
  if (K.empty()) throw Error(ErrorKind::InvalidInput, "empty index set K (genus must be 2 or 3)");
  const CMatrix& tau = ctx.tau();

  GraphFrame fr;
  fr.K = K;
  fr.edge = CMatrix(n, n);
  fr.nu = CMatrix(n, g);
  const CMatrix nc = f.NC();
  std::vector<CVector> nus;
  for (int i = 0; i < n; ++i) {
    nus.push_back(row(nu_all(s, zs[i])));
    fr.nu.row(i) = (f.N.transpose() * nus[i]).transpose();
  }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Complex shift = (nus[i].transpose() * nc * nus[j])(0, 0) / kTwoPiI;
      fr.edge(i, j) = fr.edge(j, i) = (i == j) ? (projective_connection(s, zs[i]).value - 6.0 * shift) / 6.0
                                                : omega(s, zs[i], zs[j]).value - shift;
    }

  // Pairs a <= b (0-based) with the derivatives of F up to order n at tau.
  std::vector<IndexPair> pairs;
  for (int a = 1; a <= g; ++a)
    for (int b = a; b <= g; ++b) pairs.emplace_back(a, b);
  const std::size_t P = pairs.size();
  const Complex F0 = F.value(tau);
  std::vector<Complex> F1(n >= 1 ? P : 0);
  std::vector<Complex> F2(n >= 2 ? P * P : 0);
  for (std::size_t p = 0; p < F1.size(); ++p) F1[p] = F.derivative(tau, {pairs[p]});
  if (n >= 2)
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t q = p; q < P; ++q) F2[p * P + q] = F2[q * P + p] = F.derivative(tau, {pairs[p], pairs[q]});
  auto DF = [&](const CMatrix& W) {
    Complex v = 0.0;
    for (std::size_t p = 0; p < P; ++p) v += W(pairs[p].first - 1, pairs[p].second - 1) * F1[p];
    return v;
  };
  auto D2F = [&](const CMatrix& W1, const CMatrix& W2) {
    Complex v = 0.0;
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t q = 0; q < P; ++q)
        v += W1(pairs[p].first - 1, pairs[p].second - 1) * W2(pairs[q].first - 1, pairs[q].second - 1) *
             F2[p * P + q];
    return v;
  };

  // tau = M^T tau_t M to first order; S = M C^T is symmetric.
  const CMatrix S = f.M * f.sp.C.transpose().cast<Complex>();
  const CMatrix& M = f.M;
  auto E = [&](IndexPair u) { return unit_pair(g, u.first - 1, u.second - 1); };
  auto T1 = [&](IndexPair u) -> CMatrix { return M.transpose() * E(u) * M; };
  auto T2 = [&](IndexPair u, IndexPair v) -> CMatrix {
    return M.transpose() * (E(u) * S * E(v) + E(v) * S * E(u)) * M / kTwoPiI;
  };
  auto L1 = [&](IndexPair u) { return (S * E(u)).trace() / kTwoPiI; };
  auto L2 = [&](IndexPair u, IndexPair v) { return (S * E(v) * S * E(u)).trace() / (kTwoPiI * kTwoPiI); };
  const Complex h = 0.5 * c;

  for (const auto& ms : multisets_up_to(K, n)) {
    Complex v;
    if (ms.empty()) {
      v = F0;
    } else if (ms.size() == 1) {
      v = h * L1(ms[0]) * F0 + DF(T1(ms[0]));
    } else {
      const IndexPair u = ms[0], w = ms[1];
      const Complex Fu = DF(T1(u)), Fw = DF(T1(w));
      const Complex Fuw = D2F(T1(u), T1(w)) + DF(T2(u, w));
      v = (h * L2(u, w) + h * h * L1(u) * L1(w)) * F0 + h * (L1(u) * Fw + L1(w) * Fu) + Fuw;
    }
    PairMultiset key = ms;
    for (auto& p : key) p = normalise_pair(p);
    std::sort(key.begin(), key.end());
    fr.derivatives.emplace(std::move(key), v);
  }
  return fr;
}

AutomorphyReport verify_automorphy(const SurfaceContext& ctx, const SpElement& sp, Complex c,
                                   const ModuliFunction& F, const std::vector<Complex>& zs) {
  const ModularFrame f = transform_frame(ctx.periods().omega(), sp);
  AutomorphyReport r{};
  r.lhs = apply_Dn(transformed_frame(ctx, f, c, zs, F), c).value;
  r.rhs = apply_Dn(ctx, c, F, zs).value;
  r.residual = std::abs(r.lhs - r.rhs) / std::abs(r.rhs);
  return r;
}

}  // namespace genusg
