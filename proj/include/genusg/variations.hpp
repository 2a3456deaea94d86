#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "genusg/differentials.hpp"

namespace genusg {

/// Tangent direction d_a^l: l = 0 moves w_a, l = 1 is rho_a d/drho_a, l = 2 is rho_a d/dw_{-a}.
struct ParameterDirection {
  int a;
  int l;
  int index() const { return 3 * (a - 1) + l; }
};

/// p(z) = c0 + c1 z + c2 z^2.
struct QuadraticPolynomial {
  Complex c0{0.0}, c1{0.0}, c2{0.0};

  Complex operator()(Complex z) const { return c0 + z * (c1 + z * c2); }
  /// Divided-power derivative p^{(i)} = p^{[i]} / i!.
  Complex derivative(int i, Complex z) const;
};

struct FDOptions {
  double rel_step = 1e-3;
  bool richardson = true;
};

/// A surface with its period matrix computed on first request (thread-safe).
class SurfaceContext {
 public:
  explicit SurfaceContext(Surface surface) : surface_(std::move(surface)) {}
  SurfaceContext(const SurfaceContext&) = delete;
  SurfaceContext& operator=(const SurfaceContext&) = delete;

  const Surface& surface() const { return surface_; }
  const PeriodMatrix& periods() const;
  const CMatrix& tau() const { return periods().tau; }

 private:
  Surface surface_;
  mutable std::once_flag once_;
  mutable PeriodMatrix periods_;
};

/// A quantity depending on the Schottky parameters, evaluated on a surface.
using SurfaceFamily = std::function<std::vector<Complex>(const SurfaceContext&)>;

/// Central-difference stencil around a base surface in every tangent direction.
/// Perturbed surfaces share the base policy and beta-path start points.
class ParameterStencil {
 public:
  explicit ParameterStencil(Surface base, FDOptions options = {});

  const SurfaceContext& base() const { return *base_; }
  const Surface& surface() const { return base_->surface(); }
  const FDOptions& options() const { return options_; }
  int genus() const { return base_->surface().genus(); }

  /// Raw step in the perturbed coordinate for direction d.
  double step(ParameterDirection d) const;

  /// d_a^l f, one entry per family output.
  std::vector<Complex> derivative(const SurfaceFamily& f, ParameterDirection d) const;
  /// result[d.index()][j] = d_a^l f_j for all 3g directions.
  std::vector<std::vector<Complex>> gradient(const SurfaceFamily& f) const;

 private:
  struct Samples {
    std::vector<std::unique_ptr<SurfaceContext>> ctx;  // +h, -h, +h/2, -h/2
  };
  std::unique_ptr<SurfaceContext> base_;
  FDOptions options_;
  std::vector<Samples> samples_;
};

/// Derivative in y of a scalar function by central differences (Richardson by default).
Complex y_derivative(const std::function<Complex(Complex)>& f, Complex y, double h, bool richardson = true);
/// Default y step: 1e-4 of the configuration diameter.
double default_y_step(const Surface& s);

/// Coefficients p_a^l = p^{(l)}(w_a) + rho_a^{1-l} p^{(2-l)}(w_{-a}), indexed 3(a-1)+l.
std::vector<Complex> mobius_coefficients(const SchottkyParams& params, const QuadraticPolynomial& p);

/// D^p f = sum p_a^l d_a^l f.
std::vector<Complex> mobius_generator_apply(const ParameterStencil& st, const QuadraticPolynomial& p,
                                            const SurfaceFamily& f);

/// A meromorphic form h(y_1..y_n) dy_1^{m_1}...dy_n^{m_n} depending on the parameters.
struct MeromorphicFamily {
  std::function<Complex(const SurfaceContext&, std::span<const Complex>)> eval;
  std::vector<int> weights;
};

/// D^{p,(m)}_y H = D^p H + sum_k (p(y_k) d_{y_k} + m_k p^{(1)}(y_k)) H.
Complex mobius_generator_apply_form(const ParameterStencil& st, const QuadraticPolynomial& p,
                                    const MeromorphicFamily& H, std::span<const Complex> y);

enum class NablaRealisation {
  Bers,    // nabla(x) with Theta_{2,a}^l and Psi_2 for the chosen limit points
  Moduli,  // nabla_M(x) = nabla(x) - D^{p_x}, Psi_M = Psi_2 - p_x, with p_x fixed by
           // nabla_M w_1 = nabla_M w_{-1} = nabla_M w_2 = 0
};

/// The operator nabla(x) or nabla_M(x) at a fixed point x of the base surface.
class NablaOperator {
 public:
  NablaOperator(const ParameterStencil& st, Complex x, NablaRealisation kind,
                std::optional<LimitPointConfig> limit_points = {});

  const ParameterStencil& stencil() const { return *stencil_; }
  Complex x() const { return x_; }
  NablaRealisation kind() const { return kind_; }
  /// Coefficients of d_a^l, indexed 3(a-1)+l.
  const std::vector<Complex>& coefficients() const { return coeff_; }
  const QuadraticPolynomial& gauge() const { return gauge_; }
  double fit_residual() const { return fit_residual_; }

  /// (Psi(x, y), d_y Psi(x, y)) for this realisation.
  std::pair<Complex, Complex> kernel(Complex y) const;

  /// Parameter part applied to a family.
  std::vector<Complex> apply(const SurfaceFamily& f) const;
  std::vector<Complex> contract(const std::vector<std::vector<Complex>>& gradient) const;

 private:
  const ParameterStencil* stencil_;
  Complex x_;
  NablaRealisation kind_;
  LimitPointConfig limit_points_;
  std::vector<Complex> coeff_;
  QuadraticPolynomial gauge_;
  double fit_residual_ = 0.0;
};

/// nabla(x) applied to a scalar family, weight 2 in x.
FormValue nabla(const NablaOperator& op, const SurfaceFamily& f);

using KernelFunction = std::function<std::pair<Complex, Complex>(Complex)>;

/// nabla^(m)_y(x) H: the parameter part plus sum_k (Psi(x,y_k) d_{y_k} + m_k d_{y_k} Psi(x,y_k)) H.
/// `kernel` overrides the realisation's own Psi.
FormValue nabla_form(const NablaOperator& op, const MeromorphicFamily& H, std::span<const Complex> y,
                     const KernelFunction& kernel = {});

/// Psi_M(x, y) from the determinant formula built on nabla_M(x) nu(y); rows (a, b).
class PsiModuli {
 public:
  PsiModuli(const NablaOperator& op, int a = 1, int b = 2);
  Complex operator()(Complex y) const;
  /// (Psi_M, d_y Psi_M); the derivative is skipped (returned as 0) when not requested.
  std::pair<Complex, Complex> with_dy(Complex y, bool derivative = true) const;
  /// The returned kernel refers to this object, which must outlive it.
  KernelFunction as_kernel() const;

 private:
  const NablaOperator* op_;
  int a_, b_;
  std::vector<Complex> nu_x_;
};

FormValue psi_moduli(const NablaOperator& op, Complex y, int a = 1, int b = 2);

/// Commonly used families.
SurfaceFamily tau_family();                     // tau_ab for a <= b, row-major
SurfaceFamily nu_family(std::vector<Complex> y);  // nu_a(y_j), index j*g + (a-1)
MeromorphicFamily nu_form(int a);
MeromorphicFamily omega_form();
MeromorphicFamily projective_connection_form();

}  // namespace genusg
