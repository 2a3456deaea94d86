#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "genusg/types.hpp"

namespace genusg {

/// Unordered index pair (a, b) with 1 <= a <= b <= g; tau_ab = tau_ba is one variable.
using IndexPair = std::pair<int, int>;
/// A multiset of pairs naming the mixed derivative d_{a1 b1} ... d_{aM bM}.
using PairMultiset = std::vector<IndexPair>;

IndexPair normalise_pair(IndexPair p);

/// A function of the period matrix tau with analytic derivatives in the
/// independent entries tau_ab, a <= b.
class ModuliFunction {
 public:
  virtual ~ModuliFunction() = default;

  virtual int genus() const = 0;
  /// Highest derivative order supported; negative means unbounded.
  virtual int max_order() const { return -1; }
  /// Modular weight when the function is declared to have one.
  virtual std::optional<double> weight() const { return std::nullopt; }
  virtual std::string name() const = 0;

  Complex value(const CMatrix& tau) const { return derivative(tau, {}); }
  /// d_{a1 b1} ... d_{aM bM} F at tau.
  virtual Complex derivative(const CMatrix& tau, const PairMultiset& pairs) const = 0;
};

using ModuliFunctionPtr = std::shared_ptr<const ModuliFunction>;

/// Throws InvalidInput when the order exceeds max_order() or a pair is out of range.
void check_derivative_request(const ModuliFunction& f, const CMatrix& tau, const PairMultiset& pairs);

/// Integral lattice given by its Gram matrix: symmetric, even diagonal, positive definite.
class EvenLattice {
 public:
  explicit EvenLattice(Eigen::MatrixXi gram);

  static EvenLattice sqrt2();  // sqrt(2) Z
  static EvenLattice e8();

  int rank() const { return static_cast<int>(gram_.rows()); }
  const Eigen::MatrixXi& gram() const { return gram_; }
  /// Smallest nonzero norm lambda.lambda (found by enumeration).
  int minimum() const { return minimum_; }

  /// All coefficient vectors n with n^T G n <= bound.
  std::vector<Eigen::VectorXi> vectors_up_to(double bound) const;

 private:
  Eigen::MatrixXi gram_;
  int minimum_ = 0;
};

struct ThetaSum {
  Complex value;
  double tail_bound;  // exp(-pi mu R^2), mu the smallest eigenvalue of Im Omega
  std::size_t terms;
};

struct ThetaOptions {
  std::optional<double> radius;      // R; chosen from the tail target when absent
  double tail_target = 1e-16;
  std::size_t max_terms = 20'000'000;  // guard on |{lambda : |lambda| <= R}|^g
};

/// Derivative d_{a1 b1} ... of the Siegel theta series sum over lambda in L^g of
/// exp(i pi sum_ab Omega_ab lambda_a.lambda_b), with tau = 2 pi i Omega and
/// d_ab = d/d tau_ab (a <= b one variable). Pass an empty multiset for the value.
ThetaSum siegel_theta(const EvenLattice& lattice, const CMatrix& tau, const PairMultiset& pairs = {},
                      const ThetaOptions& options = {});

/// The theta series as a moduli function of genus g. Its declared weight is rank/2.
ModuliFunctionPtr theta_supplier(EvenLattice lattice, int genus, ThetaOptions options = {});

/// One monomial coefficient * prod tau_ab^e.
struct Monomial {
  Complex coefficient;
  std::vector<std::pair<IndexPair, int>> powers;
};

/// Polynomial in the entries tau_ab, a <= b, with exact derivatives of every order.
ModuliFunctionPtr polynomial_supplier(int genus, std::vector<Monomial> terms);

/// Parses "lattice:sqrt2", "lattice:e8", "lattice:file=<gram.json>" or "poly:<json table>".
/// The polynomial table is a list of {"coef": [re, im], "powers": [[a, b, e], ...]}.
ModuliFunctionPtr parse_supplier(const std::string& spec, int genus);

}  // namespace genusg
