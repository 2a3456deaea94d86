#include "genusg/variations.hpp"

#include <cmath>

#include "genusg/parallel.hpp"

namespace genusg {

Complex QuadraticPolynomial::derivative(int i, Complex z) const {
  switch (i) {
    case 0: return (*this)(z);
    case 1: return c1 + 2.0 * c2 * z;
    case 2: return c2;
    default: return 0.0;
  }
}

const PeriodMatrix& SurfaceContext::periods() const {
  std::call_once(once_, [this] { periods_ = period_matrix(surface_, false); });
  return periods_;
}

namespace {

int raw_coordinate(ParameterDirection d) { return 3 * (d.a - 1) + (d.l == 0 ? 0 : d.l == 1 ? 2 : 1); }

void check_direction(ParameterDirection d, int genus) {
  if (d.a < 1 || d.a > genus || d.l < 0 || d.l > 2)
    throw Error(ErrorKind::InvalidInput, "parameter direction out of range");
}

}  // namespace

ParameterStencil::ParameterStencil(Surface base, FDOptions options)
    : base_(std::make_unique<SurfaceContext>(std::move(base))), options_(options) {
  if (!(options_.rel_step > 0.0)) throw Error(ErrorKind::InvalidInput, "FD step must be positive");
  const Surface& s = base_->surface();
  const int dirs = 3 * s.genus();
  const std::vector<double> offsets =
      options_.richardson ? std::vector<double>{1.0, -1.0, 0.5, -0.5} : std::vector<double>{1.0, -1.0};
  samples_.resize(dirs);
  for (auto& smp : samples_) smp.ctx.resize(offsets.size());
  parallel_for(dirs * offsets.size(), [&](std::size_t i) {
    const int d = static_cast<int>(i / offsets.size());
    const std::size_t o = i % offsets.size();
    const ParameterDirection dir{d / 3 + 1, d % 3};
    const int k = raw_coordinate(dir);
    const Complex moved = s.params().coordinate(k) + offsets[o] * step(dir);
    samples_[d].ctx[o] = std::make_unique<SurfaceContext>(
        Surface(s.params().with_coordinate(k, moved), s.policy(), s.beta_plan()));
  });
}

double ParameterStencil::step(ParameterDirection d) const {
  const auto& p = base_->surface().params();
  check_direction(d, p.genus());
  return options_.rel_step * (d.l == 1 ? std::abs(p.rho(d.a)) : p.diameter());
}

std::vector<std::vector<Complex>> ParameterStencil::gradient(const SurfaceFamily& f) const {
  const int dirs = 3 * genus();
  const std::size_t per = samples_.front().ctx.size();
  std::vector<std::vector<Complex>> values(dirs * per);
  parallel_for(values.size(), [&](std::size_t i) { values[i] = f(*samples_[i / per].ctx[i % per]); });
  std::vector<std::vector<Complex>> out(dirs);
  for (int d = 0; d < dirs; ++d) {
    const ParameterDirection dir{d / 3 + 1, d % 3};
    const double h = step(dir);
    const Complex scale = dir.l == 0 ? Complex{1.0} : base_->surface().params().rho(dir.a);
    const auto& vp = values[d * per], &vm = values[d * per + 1];
    out[d].resize(vp.size());
    for (std::size_t j = 0; j < vp.size(); ++j) {
      Complex D = (vp[j] - vm[j]) / (2.0 * h);
      if (options_.richardson) {
        const Complex Dh = (values[d * per + 2][j] - values[d * per + 3][j]) / h;
        D = (4.0 * Dh - D) / 3.0;
      }
      out[d][j] = scale * D;
    }
  }
  return out;
}

std::vector<Complex> ParameterStencil::derivative(const SurfaceFamily& f, ParameterDirection d) const {
  check_direction(d, genus());
  const auto& smp = samples_[d.index()];
  std::vector<std::vector<Complex>> v(smp.ctx.size());
  parallel_for(v.size(), [&](std::size_t i) { v[i] = f(*smp.ctx[i]); });
  const double h = step(d);
  const Complex scale = d.l == 0 ? Complex{1.0} : base_->surface().params().rho(d.a);
  std::vector<Complex> out(v[0].size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    Complex D = (v[0][j] - v[1][j]) / (2.0 * h);
    if (options_.richardson) D = (4.0 * (v[2][j] - v[3][j]) / h - D) / 3.0;
    out[j] = scale * D;
  }
  return out;
}

Complex y_derivative(const std::function<Complex(Complex)>& f, Complex y, double h, bool richardson) {
  const Complex D = (f(y + h) - f(y - h)) / (2.0 * h);
  if (!richardson) return D;
  const Complex Dh = (f(y + 0.5 * h) - f(y - 0.5 * h)) / h;
  return (4.0 * Dh - D) / 3.0;
}

double default_y_step(const Surface& s) { return 1e-4 * s.scale(); }

std::vector<Complex> mobius_coefficients(const SchottkyParams& params, const QuadraticPolynomial& p) {
  std::vector<Complex> out;
  for (int a = 1; a <= params.genus(); ++a) {
    const Complex wa = params.w(a), wn = params.w(-a), rho = params.rho(a);
    for (int l = 0; l < 3; ++l) out.push_back(p.derivative(l, wa) + std::pow(rho, 1 - l) * p.derivative(2 - l, wn));
  }
  return out;
}

static std::vector<Complex> contract_with(const std::vector<Complex>& coeff,
                                          const std::vector<std::vector<Complex>>& grad) {
  std::vector<Complex> out(grad.front().size(), Complex{0.0});
  for (std::size_t d = 0; d < grad.size(); ++d)
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += coeff[d] * grad[d][j];
  return out;
}

std::vector<Complex> mobius_generator_apply(const ParameterStencil& st, const QuadraticPolynomial& p,
                                            const SurfaceFamily& f) {
  return contract_with(mobius_coefficients(st.surface().params(), p), st.gradient(f));
}

namespace {

// sum_k (K(y_k) d_{y_k} H + m_k K'(y_k) H) for a kernel K.
Complex point_terms(const SurfaceContext& ctx, const MeromorphicFamily& H, std::span<const Complex> y,
                    const std::function<std::pair<Complex, Complex>(Complex)>& kernel) {
  const double h = default_y_step(ctx.surface());
  std::vector<Complex> pts(y.begin(), y.end());
  const Complex H0 = H.eval(ctx, pts);
  Complex total{0.0};
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto slice = [&](Complex yk) {
      std::vector<Complex> q = pts;
      q[k] = yk;
      return H.eval(ctx, q);
    };
    const Complex dH = y_derivative(slice, pts[k], h);
    const auto [K, dK] = kernel(pts[k]);
    total += K * dH + static_cast<double>(H.weights.at(k)) * dK * H0;
  }
  return total;
}

SurfaceFamily fixed_point_family(const MeromorphicFamily& H, std::span<const Complex> y) {
  std::vector<Complex> pts(y.begin(), y.end());
  return [H, pts](const SurfaceContext& ctx) { return std::vector<Complex>{H.eval(ctx, pts)}; };
}

void check_arity(const MeromorphicFamily& H, std::span<const Complex> y) {
  if (H.weights.size() != y.size()) throw Error(ErrorKind::InvalidInput, "point count does not match form weights");
}

}  // namespace

Complex mobius_generator_apply_form(const ParameterStencil& st, const QuadraticPolynomial& p,
                                    const MeromorphicFamily& H, std::span<const Complex> y) {
  check_arity(H, y);
  const Complex param = mobius_generator_apply(st, p, fixed_point_family(H, y))[0];
  return param + point_terms(st.base(), H, y, [&](Complex yk) {
           return std::pair<Complex, Complex>{p(yk), p.derivative(1, yk)};
         });
}

NablaOperator::NablaOperator(const ParameterStencil& st, Complex x, NablaRealisation kind,
                             std::optional<LimitPointConfig> limit_points)
    : stencil_(&st), x_(x), kind_(kind) {
  const Surface& s = st.surface();
  if (s.genus() < 2) throw Error(ErrorKind::InvalidInput, "nabla(x) requires genus >= 2");
  limit_points_ = limit_points ? *limit_points : default_limit_points(s, 2);
  coeff_ = theta_all(s, limit_points_, x, &fit_residual_);
  if (kind_ == NablaRealisation::Moduli) {
    // Solve (nabla - D^p) w = 0 for w in (w_1, w_{-1}, w_2).
    const auto& P = s.params();
    const Complex w1 = P.w(1), wn1 = P.w(-1), w2 = P.w(2), r1 = P.rho(1), r2 = P.rho(2);
    Eigen::Matrix3cd A;
    Eigen::Vector3cd b;
    A << 1.0, w1, w1 * w1 + r1, 1.0, wn1, wn1 * wn1 + r1, 1.0, w2, w2 * w2 + r2;
    b << coeff_[0], r1 * coeff_[2], coeff_[3];
    Eigen::FullPivLU<Eigen::Matrix3cd> lu(A);
    if (lu.rank() < 3) throw Error(ErrorKind::NumericalGuard, "moduli gauge system is singular");
    const Eigen::Vector3cd c = lu.solve(b);
    gauge_ = {c(0), c(1), c(2)};
    const auto pc = mobius_coefficients(P, gauge_);
    for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] -= pc[i];
  }
}

std::pair<Complex, Complex> NablaOperator::kernel(Complex y) const {
  auto [v, dv] = psi_N_with_dy(stencil_->surface(), limit_points_, 2, x_, y);
  if (kind_ == NablaRealisation::Moduli) {
    v -= gauge_(y);
    dv -= gauge_.derivative(1, y);
  }
  return {v, dv};
}

std::vector<Complex> NablaOperator::contract(const std::vector<std::vector<Complex>>& gradient) const {
  return contract_with(coeff_, gradient);
}

std::vector<Complex> NablaOperator::apply(const SurfaceFamily& f) const { return contract(stencil_->gradient(f)); }

FormValue nabla(const NablaOperator& op, const SurfaceFamily& f) { return {op.apply(f).at(0), {2}}; }

FormValue nabla_form(const NablaOperator& op, const MeromorphicFamily& H, std::span<const Complex> y,
                     const KernelFunction& kernel) {
  check_arity(H, y);
  const Complex param = op.apply(fixed_point_family(H, y))[0];
  const KernelFunction k = kernel ? kernel : KernelFunction([&op](Complex v) { return op.kernel(v); });
  std::vector<int> weights{2};
  weights.insert(weights.end(), H.weights.begin(), H.weights.end());
  return {param + point_terms(op.stencil().base(), H, y, k), weights};
}

PsiModuli::PsiModuli(const NablaOperator& op, int a, int b) : op_(&op), a_(a), b_(b) {
  const int g = op.stencil().genus();
  if (g < 2) throw Error(ErrorKind::InvalidInput, "Psi_M requires genus >= 2");
  if (a < 1 || b < 1 || a > g || b > g || a == b) throw Error(ErrorKind::InvalidInput, "Psi_M rows must differ");
  nu_x_ = nu_all(op.stencil().surface(), op.x());
}

Complex PsiModuli::operator()(Complex y) const { return with_dy(y, false).first; }

// Psi_M = num/den with
//   num = omega(x,y) |nu(y) nu(x)| - |nu(y) nabla nu(y)|,  den = |nu(y) nu'(y)|,
// 2x2 determinants over rows (a, b). The y-derivative is taken analytically so
// only the parameter direction is differenced.
std::pair<Complex, Complex> PsiModuli::with_dy(Complex y, bool derivative) const {
  const Surface& s = op_->stencil().surface();
  const int a = a_ - 1, b = b_ - 1, g = s.genus();
  const auto n0 = nu_all(s, y), n1 = nu_all_dx(s, y);
  const Complex w = omega(s, op_->x(), y).value;
  std::vector<Complex> G0, G1;
  if (derivative) {
    const SurfaceFamily both = [y](const SurfaceContext& ctx) {
      auto v = nu_all(ctx.surface(), y);
      const auto d = nu_all_dx(ctx.surface(), y);
      v.insert(v.end(), d.begin(), d.end());
      return v;
    };
    const auto G = op_->apply(both);
    G0.assign(G.begin(), G.begin() + g);
    G1.assign(G.begin() + g, G.end());
  } else {
    G0 = op_->apply(nu_family({y}));
  }
  const auto& nx = nu_x_;
  const Complex num = w * (n0[a] * nx[b] - nx[a] * n0[b]) - (n0[a] * G0[b] - G0[a] * n0[b]);
  const Complex den = n0[a] * n1[b] - n1[a] * n0[b];
  if (std::abs(den) < 1e-12 * (std::abs(n0[a] * n1[b]) + std::abs(n1[a] * n0[b])))
    throw Error(ErrorKind::NumericalGuard, "Psi_M denominator vanishes at this y");
  const Complex psi = num / den;
  if (!derivative) return {psi, 0.0};
  const auto n2 = nu_all_dx2(s, y);
  const Complex dw = omega_dy(s, op_->x(), y);
  const Complex dnum = dw * (n0[a] * nx[b] - nx[a] * n0[b]) + w * (n1[a] * nx[b] - nx[a] * n1[b]) -
                       (n1[a] * G0[b] + n0[a] * G1[b] - G1[a] * n0[b] - G0[a] * n1[b]);
  const Complex dden = n0[a] * n2[b] - n2[a] * n0[b];
  return {psi, (dnum - psi * dden) / den};
}

KernelFunction PsiModuli::as_kernel() const {
  return [this](Complex y) { return with_dy(y); };
}

FormValue psi_moduli(const NablaOperator& op, Complex y, int a, int b) { return {PsiModuli(op, a, b)(y), {2, -1}}; }

SurfaceFamily tau_family() {
  return [](const SurfaceContext& ctx) {
    const CMatrix& t = ctx.tau();
    std::vector<Complex> out;
    for (int a = 0; a < t.rows(); ++a)
      for (int b = a; b < t.cols(); ++b) out.push_back(t(a, b));
    return out;
  };
}

SurfaceFamily nu_family(std::vector<Complex> y) {
  return [y](const SurfaceContext& ctx) {
    std::vector<Complex> out;
    for (Complex p : y) {
      const auto v = nu_all(ctx.surface(), p);
      out.insert(out.end(), v.begin(), v.end());
    }
    return out;
  };
}

MeromorphicFamily nu_form(int a) {
  return {[a](const SurfaceContext& ctx, std::span<const Complex> y) { return nu(ctx.surface(), a, y[0]).value; },
          {1}};
}

MeromorphicFamily omega_form() {
  return {[](const SurfaceContext& ctx, std::span<const Complex> y) { return omega(ctx.surface(), y[0], y[1]).value; },
          {1, 1}};
}

MeromorphicFamily projective_connection_form() {
  return {[](const SurfaceContext& ctx, std::span<const Complex> y) {
            return projective_connection(ctx.surface(), y[0]).value;
          },
          {2}};
}

}  // namespace genusg
