#pragma once

#include <optional>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "genusg/schottky.hpp"
#include "genusg/types.hpp"

namespace genusg {

enum class TruncationMode { Fixed, Adaptive };

struct TruncationPolicy {
  int max_word_length = 8;
  double tail_tol = 1e-10;
  TruncationMode mode = TruncationMode::Fixed;
};

/// A complex coefficient together with the form weight carried by each point argument.
struct FormValue {
  Complex value;
  std::vector<int> weights;

  FormValue operator+(const FormValue& rhs) const;
  FormValue operator-(const FormValue& rhs) const;
  FormValue operator*(Complex s) const { return {value * s, weights}; }
};

/// Limit points A_0..A_{2N-2} for the Bers kernel (for N = 1, one ordinary point A_0).
struct LimitPointConfig {
  std::vector<Complex> points;
};

/// Start point of the straight beta_a path for each handle; the path ends at gamma_a(start).
/// `breaks` holds the quadrature panel boundaries along each path as fractions of its length.
struct BetaPlan {
  std::vector<Complex> starts;
  std::vector<std::vector<double>> breaks;
};

/// Picks, per handle, a start just outside C_a whose segment to gamma_a(start)
/// clears every other disc inflated by 10%.
BetaPlan plan_beta_paths(const SchottkyParams& params);

struct SeriesDiagnostics {
  int shells_used = 0;
  double last_shell_magnitude = 0.0;
  double total_magnitude = 0.0;
};

/// A Schottky surface ready for evaluation: validated parameters, derived handle
/// data and the group matrices up to the policy's word length, computed once.
class Surface {
 public:
  explicit Surface(SchottkyParams params, TruncationPolicy policy = {}, std::optional<BetaPlan> plan = {});

  const SchottkyParams& params() const { return params_; }
  const TruncationPolicy& policy() const { return policy_; }
  int genus() const { return params_.genus(); }
  const std::vector<HandleDerivedData>& handle_data() const { return derived_; }
  const GroupTable& group() const { return group_; }
  const BetaPlan& beta_plan() const { return plan_; }
  double scale() const { return scale_; }

  /// Default base point for nu_a: the start of the beta_a path.
  Complex base_point(int a) const { return plan_.starts.at(a - 1); }
  /// Generator matrices indexed by handle (gamma_a, a > 0).
  const MobiusMap& generator_matrix(int a) const { return generators_.at(a - 1); }

  bool in_any_disc(Complex z, double inflate = 1.0) const;

  /// Throws NumericalGuard when |diff| is below 1e-6 of the configuration scale.
  void check_pole(Complex diff) const;

  /// Sums kernel(gamma x, (gamma x)', (gamma x)'', out) over group elements by shell.
  /// The kernel overwrites every slot of `out` (same size as `result`). A kernel
  /// taking a leading std::size_t also receives the element's index in group().
  template <class Kernel>
  SeriesDiagnostics sum(Complex x, std::span<Complex> result, bool skip_identity, Kernel&& kernel) const;

 private:
  SchottkyParams params_;
  TruncationPolicy policy_;
  std::vector<HandleDerivedData> derived_;
  GroupTable group_;
  BetaPlan plan_;
  std::vector<MobiusMap> generators_;
  double scale_ = 1.0;
  double pole_guard_sq_ = 0.0;
};

LimitPointConfig default_limit_points(const Surface& surface, int N);
void check_limit_points(const LimitPointConfig& config, int N);

/// Bers quasiform Psi_N(x, y), weight (N, 1-N).
FormValue psi_N(const Surface& s, const LimitPointConfig& config, int N, Complex x, Complex y);
/// Coefficient of Psi_N(x, y) and its y-derivative, from one series pass.
std::pair<Complex, Complex> psi_N_with_dy(const Surface& s, const LimitPointConfig& config, int N, Complex x,
                                          Complex y);

/// Bidifferential omega(x, y), weight (1, 1).
FormValue omega(const Surface& s, Complex x, Complex y);
/// d/dy of the omega(x, y) coefficient.
Complex omega_dy(const Surface& s, Complex x, Complex y);
SeriesDiagnostics omega_diagnostics(const Surface& s, Complex x, Complex y);

/// omega_N(x, y) = sum d(gamma x)^N dy^N / (gamma x - y)^{2N}, weight (N, N).
FormValue omega_N(const Surface& s, int N, Complex x, Complex y);

/// Projective connection s(x), weight 2; the identity term is removed analytically.
FormValue projective_connection(const Surface& s, Complex x);

/// Normalised holomorphic 1-form nu_a(x) = Psi_1(x, gamma_a y0) - Psi_1(x, y0).
FormValue nu(const Surface& s, int a, Complex x, std::optional<Complex> base = {});
/// All nu_a(x), a = 1..g, at the default base points.
std::vector<Complex> nu_all(const Surface& s, Complex x);
/// d/dx of nu_a(x) for a = 1..g.
std::vector<Complex> nu_all_dx(const Surface& s, Complex x);
std::vector<Complex> nu_all_dx2(const Surface& s, Complex x);

struct PeriodMatrix {
  CMatrix tau;
  std::vector<std::pair<int, int>> index_set_K;
  double asymmetry = 0.0;           // max |tau_ab - tau_ba| before symmetrising
  double quadrature_difference = 0.0;  // planned panels vs every panel bisected

  CMatrix omega() const { return tau / kTwoPiI; }
};

/// tau_ab = integral of nu_b along beta_a, symmetrised.
PeriodMatrix period_matrix(const Surface& s, bool check_quadrature = true);

/// True when the imaginary part of omega is positive definite with smallest
/// eigenvalue above tol.
bool imag_positive_definite(const CMatrix& omega, double tol = 1e-9);

struct ThetaFit {
  Complex theta[3];   // Theta_{2,a}^l(x), l = 0, 1, 2
  double residual;    // relative least-squares residual
};

/// Holomorphic 2-form coefficients Theta_{2,a}^l(x) from the quasiperiodicity of Psi_2.
ThetaFit theta_span(const Surface& s, const LimitPointConfig& config, int a, Complex x, int samples = 5);

/// Theta_{2,a}^l(x) for all handles, ordered (a=1,l=0), (1,1), (1,2), (2,0), ...
std::vector<Complex> theta_all(const Surface& s, const LimitPointConfig& config, Complex x,
                               double* max_residual = nullptr);

// ---------------------------------------------------------------------------

template <class Kernel>
SeriesDiagnostics Surface::sum(Complex x, std::span<Complex> result, bool skip_identity, Kernel&& kernel) const {
  const std::size_t width = result.size();
  std::vector<CompensatedSum> acc(width);
  std::vector<Complex> terms(width);
  SeriesDiagnostics diag;
  const auto& mats = group_.matrices();
  const int L = group_.max_word_length();
  for (int k = 0; k <= L; ++k) {
    double shell_mag = 0.0;
    for (std::size_t i = group_.shell_begin(k); i < group_.shell_begin(k + 1); ++i) {
      if (skip_identity && i == 0) continue;
      const MobiusMap& g = mats[i];
      const Complex den = g.c() * x + g.d();
      const Complex gx = (g.a() * x + g.b()) / den;
      const Complex dgx = 1.0 / (den * den);
      if constexpr (std::is_invocable_v<Kernel, std::size_t, Complex, Complex, Complex, std::span<Complex>>)
        kernel(i, gx, dgx, -2.0 * g.c() * dgx / den, std::span<Complex>(terms));
      else
        kernel(gx, dgx, -2.0 * g.c() * dgx / den, std::span<Complex>(terms));
      for (std::size_t j = 0; j < width; ++j) {
        acc[j].add(terms[j]);
        shell_mag += std::abs(terms[j]);
      }
    }
    diag.shells_used = k;
    diag.last_shell_magnitude = shell_mag;
    diag.total_magnitude += shell_mag;
    if (policy_.mode == TruncationMode::Adaptive && k >= 1 &&
        shell_mag < policy_.tail_tol * diag.total_magnitude)
      break;
    if (policy_.mode == TruncationMode::Adaptive && k == L && L >= 1 &&
        shell_mag >= policy_.tail_tol * diag.total_magnitude)
      throw Error(ErrorKind::NotConverged, "Poincaré series tail above tolerance at max_word_length");
  }
  for (std::size_t j = 0; j < width; ++j) result[j] = acc[j].value();
  return diag;
}

}  // namespace genusg
