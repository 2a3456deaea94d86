#include "genusg/schottky.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace genusg {

SchottkyParams::SchottkyParams(std::vector<Handle> handles) : handles_(std::move(handles)) {
  if (handles_.empty()) throw Error(ErrorKind::InvalidInput, "genus must be at least 1");
  for (std::size_t i = 0; i < handles_.size(); ++i) {
    const Handle& h = handles_[i];
    if (is_infinite(h.w) || is_infinite(h.w_neg) || is_infinite(h.rho) || std::isnan(std::abs(h.w)) ||
        std::isnan(std::abs(h.w_neg)) || std::isnan(std::abs(h.rho)))
      throw Error(ErrorKind::InvalidInput, "handle " + std::to_string(i + 1) + " has non-finite parameters");
    if (h.rho == Complex{0.0})
      throw Error(ErrorKind::InvalidInput, "handle " + std::to_string(i + 1) + " has rho = 0");
  }
}

const Handle& SchottkyParams::handle(int a) const {
  if (a < 1 || a > genus()) throw Error(ErrorKind::InvalidInput, "handle index out of range");
  return handles_[a - 1];
}

Complex SchottkyParams::w(int signed_index) const {
  const Handle& h = handle(std::abs(signed_index));
  return signed_index > 0 ? h.w : h.w_neg;
}

Complex SchottkyParams::rho(int signed_index) const { return handle(std::abs(signed_index)).rho; }

double SchottkyParams::radius(int signed_index) const { return std::sqrt(std::abs(rho(signed_index))); }

double SchottkyParams::diameter() const {
  double span = 0.0, r = 0.0;
  const auto idx = signed_indices(genus());
  for (int a : idx) {
    r = std::max(r, radius(a));
    for (int b : idx) span = std::max(span, std::abs(w(a) - w(b)));
  }
  return span + r;
}

Complex SchottkyParams::coordinate(int k) const {
  const Handle& h = handles_.at(k / 3);
  switch (k % 3) {
    case 0: return h.w;
    case 1: return h.w_neg;
    default: return h.rho;
  }
}

SchottkyParams SchottkyParams::with_coordinate(int k, Complex value) const {
  SchottkyParams out = *this;
  Handle& h = out.handles_.at(k / 3);
  switch (k % 3) {
    case 0: h.w = value; break;
    case 1: h.w_neg = value; break;
    default: h.rho = value; break;
  }
  return out;
}

std::vector<int> signed_indices(int genus) {
  std::vector<int> out;
  out.reserve(2 * genus);
  for (int a = 1; a <= genus; ++a) {
    out.push_back(a);
    out.push_back(-a);
  }
  return out;
}

ValidationReport validate(const SchottkyParams& params) {
  ValidationReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  const auto idx = signed_indices(params.genus());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      const int a = idx[i], b = idx[j];
      const double margin = std::abs(params.w(a) - params.w(b)) - (params.radius(a) + params.radius(b));
      report.min_margin = std::min(report.min_margin, margin);
      if (!(margin > 0.0)) {
        report.pass = false;
        report.violations.push_back({a, b, margin});
      }
    }
  }
  return report;
}

std::vector<HandleDerivedData> derive_handle_data(const SchottkyParams& params) {
  std::vector<HandleDerivedData> out;
  for (int a = 1; a <= params.genus(); ++a) {
    const Handle& h = params.handle(a);
    const Complex d = h.w_neg - h.w;
    if (std::abs(d) == 0.0) throw Error(ErrorKind::Domain, "handle " + std::to_string(a) + ": w_a = w_{-a}");
    // rho q^2 + (2 rho + d^2) q + rho = 0; the roots multiply to one.
    const Complex bq = 2.0 * h.rho + d * d;
    const Complex disc = std::sqrt(bq * bq - 4.0 * h.rho * h.rho);
    const Complex den1 = -bq - disc, den2 = -bq + disc;
    const Complex den = std::abs(den1) >= std::abs(den2) ? den1 : den2;
    const Complex q = 2.0 * h.rho / den;
    if (std::abs(std::abs(q) - 1.0) < 1e-10 || std::abs(q) >= 1.0)
      throw Error(ErrorKind::Domain, "handle " + std::to_string(a) + ": no multiplier with |q| < 1");
    const Complex W = (h.w + q * h.w_neg) / (1.0 + q);
    const Complex W_neg = (h.w_neg + q * h.w) / (1.0 + q);
    out.push_back({q, W, W_neg});
  }
  return out;
}

Complex complex_infinity() {
  const double inf = std::numeric_limits<double>::infinity();
  return {inf, inf};
}

MobiusMap::MobiusMap(Complex a, Complex b, Complex c, Complex d) {
  const Complex det = a * d - b * c;
  if (std::abs(det) == 0.0) throw Error(ErrorKind::InvalidInput, "Möbius map with zero determinant");
  const Complex s = std::sqrt(det);
  a_ = a / s;
  b_ = b / s;
  c_ = c / s;
  d_ = d / s;
}

Complex MobiusMap::apply(Complex z) const {
  if (is_infinite(z)) return c_ == Complex{0.0} ? complex_infinity() : a_ / c_;
  const Complex cz = c_ * z;
  const Complex den = cz + d_;
  if (std::abs(den) <= 4.0 * std::numeric_limits<double>::epsilon() * (std::abs(cz) + std::abs(d_)))
    return complex_infinity();
  return (a_ * z + b_) / den;
}

Complex MobiusMap::derivative(Complex z) const {
  const Complex den = c_ * z + d_;
  return 1.0 / (den * den);
}

MobiusMap MobiusMap::operator*(const MobiusMap& r) const {
  return MobiusMap(Raw{}, a_ * r.a_ + b_ * r.c_, a_ * r.b_ + b_ * r.d_, c_ * r.a_ + d_ * r.c_,
                   c_ * r.b_ + d_ * r.d_);
}

MobiusMap MobiusMap::inverse() const { return MobiusMap(Raw{}, d_, -b_, -c_, a_); }

GroupElement generator(const SchottkyParams& params, int signed_index) {
  const int a = std::abs(signed_index);
  const Handle& h = params.handle(a);
  // [w_{-a}, rho - w_a w_{-a}; 1, -w_a] has determinant -rho.
  MobiusMap m(h.w_neg, h.rho - h.w * h.w_neg, Complex{1.0}, -h.w);
  if (signed_index < 0) m = m.inverse();
  return {{static_cast<std::int8_t>(signed_index)}, m};
}

std::uint64_t shell_size(int genus, int k) {
  if (k == 0) return 1;
  std::uint64_t n = 2 * static_cast<std::uint64_t>(genus);
  for (int i = 1; i < k; ++i) n *= static_cast<std::uint64_t>(2 * genus - 1);
  return n;
}

GroupEnumerator::GroupEnumerator(const SchottkyParams& params, int max_word_length)
    : letters_(signed_indices(params.genus())), max_length_(max_word_length) {
  if (max_word_length < 0) throw Error(ErrorKind::InvalidInput, "max_word_length must be >= 0");
  for (int a : letters_) generators_.push_back(generator(params, a));
}

std::optional<std::vector<GroupElement>> GroupEnumerator::next_shell() {
  if (next_length_ > max_length_) return std::nullopt;
  std::vector<GroupElement> shell;
  if (next_length_ == 0) {
    shell.push_back({{}, MobiusMap::identity()});
  } else {
    shell.reserve(current_.size() * (next_length_ == 1 ? 2 * letters_.size() : letters_.size()));
    for (const GroupElement& e : current_) {
      const int last = e.word.empty() ? 0 : e.word.back();
      for (std::size_t i = 0; i < letters_.size(); ++i) {
        if (letters_[i] == -last) continue;
        GroupElement next{e.word, e.matrix * generators_[i].matrix};
        next.word.push_back(static_cast<std::int8_t>(letters_[i]));
        shell.push_back(std::move(next));
      }
    }
  }
  ++next_length_;
  current_ = shell;
  return shell;
}

GroupTable::GroupTable(const SchottkyParams& params, int max_word_length) {
  GroupEnumerator gen(params, max_word_length);
  shell_offsets_.push_back(0);
  while (auto shell = gen.next_shell()) {
    for (auto& e : *shell) {
      matrices_.push_back(e.matrix);
      words_.push_back(std::move(e.word));
    }
    shell_offsets_.push_back(matrices_.size());
  }
}

SchottkyParams mobius_transform(const SchottkyParams& params, const MobiusMap& sigma) {
  const Complex A = sigma.a(), B = sigma.b(), C = sigma.c(), D = sigma.d();
  const double scale = params.diameter();
  std::vector<Handle> out;
  for (const Handle& h : params.handles()) {
    const Complex den = (C * h.w + D) * (C * h.w_neg + D) - h.rho * C * C;
    if (std::abs(den) < 1e-14 * std::max(1.0, scale * std::abs(C) * std::abs(C) * scale))
      throw Error(ErrorKind::Domain, "Möbius map sends a disc centre to infinity");
    const Complex w = ((A * h.w + B) * (C * h.w_neg + D) - h.rho * A * C) / den;
    const Complex w_neg = ((A * h.w_neg + B) * (C * h.w + D) - h.rho * A * C) / den;
    out.push_back({w, w_neg, h.rho / (den * den)});
  }
  return SchottkyParams(std::move(out));
}

}  // namespace genusg
