#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "genusg/virgraphs.hpp"

namespace genusg {

using IMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// [A B; C D] in Sp(2g, Z), acting by Omega -> (A Omega + B)(C Omega + D)^{-1}.
struct SpElement {
  IMatrix A, B, C, D;

  int genus() const { return static_cast<int>(A.rows()); }
  IMatrix block() const;
  /// [D^T, -B^T; -C^T, A^T].
  SpElement inverse() const;
  SpElement operator*(const SpElement& other) const;
  /// Exact integer check of AD^T - BC^T = A^T D - C^T B = I and the four symmetry relations.
  bool is_symplectic() const;

  static SpElement identity(int g);
  static SpElement from_block(const IMatrix& m);
  /// [I, B; 0, I] with B symmetric.
  static SpElement shear(const IMatrix& B);
  /// [0, -I; I, 0].
  static SpElement inversion(int g);
};

/// Product of word_length generators drawn from the shears (entries of B in {-1, 0, 1}),
/// the inversion and their inverses.
SpElement random_sp(int g, int word_length, std::mt19937_64& rng);

/// A C = 0 element: a single nonzero shear.
SpElement random_shear(int g, std::mt19937_64& rng);

struct ModularFrame {
  SpElement sp;
  CMatrix Omega;
  CMatrix M;        // C Omega + D
  CMatrix N;        // M^{-1}
  CMatrix Omega_t;  // (A Omega + B) N
  Complex log_det_M;  // principal branch

  CMatrix NC() const { return N * sp.C.cast<Complex>(); }
};

/// Throws NumericalGuard when M is singular or the transformed matrix fails the
/// symmetry / positivity / inverse checks.
ModularFrame transform_frame(const CMatrix& Omega, const SpElement& sp);

/// max |N - (A^T - C^T Omega_t)|, relative to max(1, |N|).
double lemma_N_residual(const ModularFrame& f);
/// max |NC - (NC)^T|, relative to max(1, |NC|).
double nc_symmetry_residual(const ModularFrame& f);

/// d/dOmega_ab log det M for a <= b, Omega_ab = Omega_ba moved together (Jacobi formula).
CMatrix dlogdetM_dOmega(const ModularFrame& f);

/// Max over a <= b of |(NC)_ab - k_ab d/dOmega_ab log det M| with k = 1 on the diagonal
/// and 1/2 off it, the derivative taken by Richardson-extrapolated central differences.
double logdetM_derivative_check(const CMatrix& Omega, const SpElement& sp, double step = 1e-3);

struct TransformedDifferentials {
  std::vector<Complex> nu;  // nu(x) N
  Complex omega;            // at (x, y)
  Complex s;                // at x
};

/// Transformed 1-forms, bidifferential and projective connection on the same surface.
TransformedDifferentials transformed_differentials(const SurfaceContext& ctx, const ModularFrame& f, Complex x,
                                                   Complex y);

struct LogDetConsistency {
  double omega_residual;  // transformed omega against the log det M expansion
  double s_residual;      // transformed s against s - 6 nabla_M log det M
};

LogDetConsistency logdet_consistency(const SurfaceContext& ctx, const ModularFrame& f, Complex x, Complex y);

/// log det(C Omega + D) as a family on perturbed surfaces, continued from the base value.
SurfaceFamily logdetM_family(const SpElement& sp, Complex base_value);

/// Graph frame in the transformed marking: transformed edges and nu, and derivatives of
/// det(M)^{c/2} F in the transformed tau entries divided by det(M)^{c/2}. Orders <= 2.
GraphFrame transformed_frame(const SurfaceContext& ctx, const ModularFrame& f, Complex c,
                             const std::vector<Complex>& zs, const ModuliFunction& F);

struct AutomorphyReport {
  Complex lhs;  // transformed D_n on det(M)^{c/2} F, divided by det(M)^{c/2}
  Complex rhs;  // D_n F
  double residual;
};

/// Both sides of the det(M)^{c/2} automorphy of D_n on one surface, n = zs.size() <= 2.
AutomorphyReport verify_automorphy(const SurfaceContext& ctx, const SpElement& sp, Complex c,
                                   const ModuliFunction& F, const std::vector<Complex>& zs);

}  // namespace genusg
