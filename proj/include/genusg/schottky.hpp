#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "genusg/types.hpp"

namespace genusg {

/// Sewing data for one handle: paired isometric circles centred at w and
/// w_neg, coupled by rho.
struct Handle {
  Complex w;
  Complex w_neg;
  Complex rho;
};

/// The 3g complex parameters (w_a, w_{-a}, rho_a) of a Schottky uniformisation.
///
/// Handles are indexed 1..g; signed indices ±a address w_{±a}. The disc
/// Delta_a has centre w_a and radius |rho_a|^{1/2}, with rho_{-a} = rho_a.
class SchottkyParams {
 public:
  SchottkyParams() = default;
  explicit SchottkyParams(std::vector<Handle> handles);

  int genus() const { return static_cast<int>(handles_.size()); }
  const std::vector<Handle>& handles() const { return handles_; }
  const Handle& handle(int a) const;  // a in 1..g

  Complex w(int signed_index) const;
  Complex rho(int signed_index) const;
  double radius(int signed_index) const;

  /// Largest distance between any two disc centres plus the largest radius.
  double diameter() const;

  /// Raw coordinate access in the order (w_1, w_{-1}, rho_1, w_2, ...).
  Complex coordinate(int k) const;
  SchottkyParams with_coordinate(int k, Complex value) const;

 private:
  std::vector<Handle> handles_;
};

/// All signed indices -g..-1, 1..g in the order 1, -1, 2, -2, ...
std::vector<int> signed_indices(int genus);

struct DiscViolation {
  int a;
  int b;
  double margin;  // |w_a - w_b| - (|rho_a|^{1/2} + |rho_b|^{1/2}); <= 0 for a violation
};

struct ValidationReport {
  bool pass = true;
  double min_margin = 0.0;
  std::vector<DiscViolation> violations;
};

/// Checks the disc-separation condition for every unordered pair of signed indices.
ValidationReport validate(const SchottkyParams& params);

/// Multiplier and fixed points for one handle.
struct HandleDerivedData {
  Complex q;
  Complex W;      // repelling fixed point W_a
  Complex W_neg;  // attracting fixed point W_{-a}
};

std::vector<HandleDerivedData> derive_handle_data(const SchottkyParams& params);

/// Möbius map with determinant normalised to one.
class MobiusMap {
 public:
  MobiusMap() = default;
  MobiusMap(Complex a, Complex b, Complex c, Complex d);

  static MobiusMap identity() { return {}; }

  Complex a() const { return a_; }
  Complex b() const { return b_; }
  Complex c() const { return c_; }
  Complex d() const { return d_; }

  /// z -> (az + b)/(cz + d); infinity maps to a/c and the pole maps to infinity.
  Complex apply(Complex z) const;
  /// d(sigma z)/dz = (cz + d)^{-2}.
  Complex derivative(Complex z) const;

  MobiusMap operator*(const MobiusMap& rhs) const;
  MobiusMap inverse() const;

 private:
  struct Raw {};
  MobiusMap(Raw, Complex a, Complex b, Complex c, Complex d) : a_(a), b_(b), c_(c), d_(d) {}

  Complex a_{1.0}, b_{0.0}, c_{0.0}, d_{1.0};
};

inline bool is_infinite(Complex z) { return !std::isfinite(z.real()) || !std::isfinite(z.imag()); }
Complex complex_infinity();

struct GroupElement {
  std::vector<std::int8_t> word;  // signed generator indices, reduced
  MobiusMap matrix;
};

/// gamma_a for a > 0, gamma_a^{-1} for a < 0: gamma_a z = w_{-a} + rho_a/(z - w_a).
GroupElement generator(const SchottkyParams& params, int signed_index);

/// Yields reduced words shell by shell: the identity, then all words of length 1, 2, ...
class GroupEnumerator {
 public:
  GroupEnumerator(const SchottkyParams& params, int max_word_length);

  /// The next shell, or nullopt once max_word_length has been emitted.
  std::optional<std::vector<GroupElement>> next_shell();

 private:
  std::vector<GroupElement> generators_;  // indexed by position in signed_indices
  std::vector<int> letters_;
  std::vector<GroupElement> current_;
  int max_length_;
  int next_length_ = 0;
};

/// Number of reduced words of length exactly k in the free group on g generators.
std::uint64_t shell_size(int genus, int k);

/// Eager table of group matrices, stored contiguously by shell.
class GroupTable {
 public:
  GroupTable() = default;
  GroupTable(const SchottkyParams& params, int max_word_length);

  int max_word_length() const { return static_cast<int>(shell_offsets_.size()) - 2; }
  std::size_t size() const { return matrices_.size(); }
  const std::vector<MobiusMap>& matrices() const { return matrices_; }
  const std::vector<std::vector<std::int8_t>>& words() const { return words_; }
  /// Elements of shell k occupy [shell_begin(k), shell_begin(k+1)).
  std::size_t shell_begin(int k) const { return shell_offsets_[k]; }

 private:
  std::vector<MobiusMap> matrices_;
  std::vector<std::vector<std::int8_t>> words_;
  std::vector<std::size_t> shell_offsets_;
};

/// Global Möbius action on the parameters; throws Domain if an image point is at infinity.
SchottkyParams mobius_transform(const SchottkyParams& params, const MobiusMap& sigma);

}  // namespace genusg
