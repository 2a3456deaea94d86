#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "common.hpp"
#include "genusg/schottky.hpp"

using namespace genusg;

namespace {

// Direct action of a word, letter by letter, without matrices.
Complex act_word(const SchottkyParams& p, const std::vector<std::int8_t>& word, Complex z) {
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    const int a = *it;
    const Complex w = p.w(std::abs(a)), wn = p.w(-std::abs(a)), r = p.rho(a);
    z = a > 0 ? wn + r / (z - w) : w + r / (z - wn);
  }
  return z;
}

}  // namespace

TEST_CASE("validate: fixture passes with separation margin") {
  const auto r = validate(fixture::g2());
  CHECK(r.pass);
  CHECK(r.min_margin == doctest::Approx(2.0 - 2.0 * std::sqrt(0.02)).epsilon(1e-14));
}

TEST_CASE("validate: overlapping discs are reported with their margin") {
  const SchottkyParams p(std::vector<Handle>{{{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.0}}});
  const auto r = validate(p);
  CHECK_FALSE(r.pass);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].a == 1);
  CHECK(r.violations[0].b == -1);
  CHECK(r.violations[0].margin == doctest::Approx(1.0 - 2.0 * std::sqrt(0.5)));
}

TEST_CASE("validate: well separated g=1 passes") {
  CHECK(validate(SchottkyParams(std::vector<Handle>{{{0.0, 0.0}, {10.0, 0.0}, {1.0, 0.0}}})).pass);
}

TEST_CASE("SchottkyParams rejects rho = 0 and empty genus") {
  CHECK_THROWS_AS(SchottkyParams(std::vector<Handle>{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}}}), Error);
  CHECK_THROWS_AS(SchottkyParams(std::vector<Handle>{}), Error);
}

TEST_CASE("derive_handle_data: small-rho expansion") {
  for (double rho : {1e-3, 1e-4, 1e-5}) {
    const SchottkyParams p(std::vector<Handle>{{{0.0, 0.0}, {4.0, 0.0}, {rho, 0.0}}});
    const auto d = derive_handle_data(p)[0];
    // q = -rho/d^2 - 2 rho^2/d^4 + O(rho^3), d = 4
    CHECK(std::abs(d.q - Complex(-rho / 16.0)) < 2.0 * rho * rho / 256.0 * 1.5);
    CHECK(std::abs(d.W) < rho);
    CHECK(std::abs(d.W_neg - 4.0) < rho);
  }
}

TEST_CASE("derive_handle_data: round trip reproduces (w, rho)") {
  const SchottkyParams p({{{-3.0, 0.5}, {-1.0, -0.2}, {0.02, 0.01}}, {{1.0, 0.1}, {3.0, 0.0}, {-0.03, 0.02}}});
  const auto dd = derive_handle_data(p);
  for (int a = 1; a <= 2; ++a) {
    const auto& d = dd[a - 1];
    const Complex w = (d.W - d.q * d.W_neg) / (1.0 - d.q);
    const Complex rho = -d.q * (d.W_neg - d.W) * (d.W_neg - d.W) / ((1.0 - d.q) * (1.0 - d.q));
    CHECK(fixture::rel(w, p.w(a)) < 1e-12);
    CHECK(fixture::rel(rho, p.rho(a)) < 1e-12);
    CHECK(std::abs(d.q) < 1.0);
  }
}

TEST_CASE("derive_handle_data: roots of the multiplier quadratic multiply to one") {
  const Complex rho{0.02, 0.01}, dlt{2.0, 0.3};
  const Complex b = 2.0 * rho + dlt * dlt;
  const Complex disc = std::sqrt(b * b - 4.0 * rho * rho);
  const Complex q1 = (-b + disc) / (2.0 * rho), q2 = (-b - disc) / (2.0 * rho);
  CHECK(std::abs(q1 * q2 - 1.0) < 1e-12);
  const SchottkyParams p(std::vector<Handle>{{{0.0, 0.0}, dlt, rho}});
  const Complex q = derive_handle_data(p)[0].q;
  CHECK(std::min(std::abs(q - q1), std::abs(q - q2)) < 1e-12);
}

TEST_CASE("generator: pole, image of infinity, inverse image of infinity") {
  const auto p = fixture::g2();
  for (int a = 1; a <= 2; ++a) {
    const auto g = generator(p, a).matrix;
    CHECK(is_infinite(g.apply(p.w(a))));
    CHECK(std::abs(g.apply(complex_infinity()) - p.w(-a)) < 1e-14);
    CHECK(std::abs(generator(p, -a).matrix.apply(complex_infinity()) - p.w(a)) < 1e-14);
  }
}

TEST_CASE("generator: trace and fixed points agree with derived data") {
  const SchottkyParams p({{{-3.0, 0.5}, {-1.0, -0.2}, {0.02, 0.01}}, {{1.0, 0.1}, {3.0, 0.0}, {-0.03, 0.02}}});
  const auto dd = derive_handle_data(p);
  for (int a = 1; a <= 2; ++a) {
    const auto g = generator(p, a).matrix;
    const Complex tr = g.a() + g.d();
    const Complex q = dd[a - 1].q;
    CHECK(fixture::rel(tr * tr, q + 2.0 + 1.0 / q) < 1e-10);
    CHECK(std::abs(g.apply(dd[a - 1].W) - dd[a - 1].W) < 1e-10);
    CHECK(std::abs(g.apply(dd[a - 1].W_neg) - dd[a - 1].W_neg) < 1e-10);
    CHECK(std::abs(g.a() * g.d() - g.b() * g.c() - 1.0) < 1e-13);
  }
}

TEST_CASE("enumerate_group: counts and reducedness") {
  auto count = [](const SchottkyParams& p, int L) {
    GroupEnumerator e(p, L);
    std::size_t n = 0;
    int k = 0;
    while (auto shell = e.next_shell()) {
      CHECK(shell->size() == shell_size(p.genus(), k));
      for (const auto& el : *shell) {
        CHECK(static_cast<int>(el.word.size()) == k);
        for (std::size_t i = 1; i < el.word.size(); ++i) CHECK(el.word[i] != -el.word[i - 1]);
      }
      n += shell->size();
      ++k;
    }
    return n;
  };
  CHECK(count(fixture::g2(), 2) == 17);
  CHECK(count(SchottkyParams(std::vector<Handle>{{{0.0, 0.0}, {10.0, 0.0}, {1.0, 0.0}}}), 3) == 7);
  CHECK(count(fixture::g2(), 5) == 1 + 4 + 12 + 36 + 108 + 324);
}

TEST_CASE("enumerate_group: identity first, distinct words, matrices act like letter composition") {
  const auto p = fixture::g2();
  GroupTable t(p, 4);
  CHECK(t.words()[0].empty());
  std::set<std::vector<std::int8_t>> seen(t.words().begin(), t.words().end());
  CHECK(seen.size() == t.size());
  const Complex z{0.3, 5.1};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Complex direct = act_word(p, t.words()[i], z);
    CHECK(fixture::rel(t.matrices()[i].apply(z), direct) < 1e-12);
    const auto& m = t.matrices()[i];
    const double size = std::abs(m.a() * m.d()) + std::abs(m.b() * m.c());
    CHECK(std::abs(m.a() * m.d() - m.b() * m.c() - 1.0) < 1e-14 * size);
  }
}

TEST_CASE("mobius_transform: identity and composition") {
  const auto p = fixture::g2();
  const auto same = mobius_transform(p, MobiusMap::identity());
  for (int k = 0; k < 6; ++k) CHECK(std::abs(same.coordinate(k) - p.coordinate(k)) < 1e-15);

  const MobiusMap s1({1.0, 0.1}, {0.2, 0.0}, {0.01, -0.02}, {1.0, 0.0});
  const MobiusMap s2({0.9, 0.0}, {-0.1, 0.3}, {0.02, 0.01}, {1.1, 0.0});
  const auto lhs = mobius_transform(mobius_transform(p, s1), s2);
  const auto rhs = mobius_transform(p, s2 * s1);
  for (int k = 0; k < 6; ++k) CHECK(fixture::rel(lhs.coordinate(k), rhs.coordinate(k)) < 1e-12);
}

TEST_CASE("mobius_transform conjugates the generators") {
  const auto p = fixture::g2();
  const MobiusMap s({1.0, 0.1}, {0.2, 0.0}, {0.01, -0.02}, {1.0, 0.0});
  const auto q = mobius_transform(p, s);
  const Complex z{0.7, 4.0};
  for (int a = 1; a <= 2; ++a) {
    const Complex lhs = generator(q, a).matrix.apply(s.apply(z));
    const Complex rhs = s.apply(generator(p, a).matrix.apply(z));
    CHECK(fixture::rel(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("mobius_transform keeps the configuration valid near the identity") {
  const auto p = fixture::g2();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1e-3);
  for (int i = 0; i < 20; ++i) {
    const MobiusMap s(Complex(1.0 + n(rng), n(rng)), Complex(n(rng), n(rng)), Complex(n(rng), n(rng)),
                      Complex(1.0 + n(rng), n(rng)));
    CHECK(validate(mobius_transform(p, s)).pass);
  }
}

TEST_CASE("mobius_transform rejects maps sending a centre to infinity") {
  const auto p = fixture::g2();
  // C = 1 and (w_1 + D)(w_{-1} + D) = rho_1 make the denominator of the action vanish.
  const MobiusMap s(Complex(0.0), Complex(-1.0), Complex(1.0), Complex(2.0 + std::sqrt(1.02)));
  CHECK_THROWS_AS(mobius_transform(p, s), Error);
}
