#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "common.hpp"
#include "genusg/virgraphs.hpp"

using namespace genusg;
using fixture::rel;

namespace {

const ParameterStencil& stencil() {
  static const ParameterStencil st(Surface(fixture::g2()));
  return st;
}

const SurfaceContext& ctx() { return stencil().base(); }

ModuliFunctionPtr theta2() {
  static const auto F = theta_supplier(EvenLattice::sqrt2(), 2);
  return F;
}

// (cycles, chains) histogram by brute force over all maps {0..n-1} -> {-1..n-1}.
std::map<std::pair<int, int>, int> census_oracle(int n) {
  std::map<std::pair<int, int>, int> out;
  std::vector<int> m(n, -1);
  while (true) {
    std::vector<int> hits(n, 0);
    bool injective = true;
    for (int v : m)
      if (v >= 0 && ++hits[v] > 1) injective = false;
    if (injective) {
      int edges = 0, cycles = 0;
      for (int v : m) edges += v >= 0;
      for (int i = 0; i < n; ++i) {
        int v = m[i], smallest = i, k = 0;
        while (v >= 0 && v != i && k++ < n) {
          smallest = std::min(smallest, v);
          v = m[v];
        }
        if (v == i && smallest == i) ++cycles;
      }
      ++out[{cycles, n - edges}];
    }
    int k = 0;
    while (k < n && ++m[k] == n) m[k++] = -1;
    if (k == n) break;
  }
  return out;
}

const std::vector<Complex> zs{Complex(0.8, 5.5), Complex(-2.5, -4.0), Complex(4.5, 2.0), Complex(-5.0, 1.5)};

}  // namespace

TEST_CASE("graph counts") {
  const std::uint64_t expected[] = {1, 2, 7, 34, 209, 1546, 13327, 130922, 1441729};
  for (int n = 0; n <= 8; ++n) CHECK(graph_count(n) == expected[n]);
  for (int n = 0; n <= 7; ++n) CHECK(enumerate_graphs(n).size() == expected[n]);
  CHECK_THROWS_AS(enumerate_graphs(9), Error);
}

TEST_CASE("cycle and chain census matches brute force") {
  for (int n = 1; n <= 6; ++n) {
    std::map<std::pair<int, int>, int> got;
    for (const auto& g : enumerate_graphs(n)) ++got[{g.cycle_count(), g.chain_count()}];
    CHECK(got == census_oracle(n));
  }
}

TEST_CASE("cycles and chains partition the vertices") {
  for (const auto& g : enumerate_graphs(5)) {
    std::vector<int> seen(g.n, 0);
    for (const auto& c : g.cycles) {
      for (int v : c) ++seen[v];
      for (std::size_t i = 0; i < c.size(); ++i) CHECK(g.mapping[c[i]] == c[(i + 1) % c.size()]);
    }
    for (const auto& c : g.chains) {
      for (int v : c) ++seen[v];
      CHECK(g.mapping[c.back()] == -1);
      CHECK(std::count(g.mapping.begin(), g.mapping.end(), c.front()) == 0);
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int k) { return k == 1; }));
    CHECK(static_cast<int>(g.edges().size()) == g.n - g.chain_count());
  }
  CHECK_THROWS_AS(make_graph({1, 1}), Error);
  CHECK_THROWS_AS(make_graph({2, -1}), Error);
}

TEST_CASE("edge weights") {
  const Surface& s = ctx().surface();
  const Complex a = zs[0], b = zs[1];
  CHECK(rel(edge_weight(s, a, b, false).value, edge_weight(s, b, a, false).value) < 1e-12);
  CHECK(rel(edge_weight(s, a, a, true).value, projective_connection(s, a).value / 6.0) < 1e-14);
}

TEST_CASE("multisets") {
  const std::vector<IndexPair> K{{1, 1}, {1, 2}, {2, 2}};
  const auto m = multisets_up_to(K, 3);
  CHECK(m.size() == 1 + 3 + 6 + 10);
  for (const auto& ms : m) CHECK(std::is_sorted(ms.begin(), ms.end()));
}

TEST_CASE("small graphs") {
  const Surface& s = ctx().surface();
  const CMatrix& tau = ctx().tau();
  const Complex c(1.5, 0.0), z = zs[0];
  const auto F = theta2();

  CHECK(rel(apply_Dn(ctx(), c, *F, {}).value, F->value(tau)) < 1e-14);

  const GraphFrame fr = make_frame(s, tau, ctx().periods().index_set_K, {z}, *F);
  const Complex sF = projective_connection(s, z).value * F->value(tau);
  CHECK(rel(apply_graph(fr, make_graph({0}), c), c / 12.0 * sF) < 1e-13);

  const SurfaceFamily Ftau = [F](const SurfaceContext& x) { return std::vector<Complex>{F->value(x.tau())}; };
  const Complex nablaF = NablaOperator(stencil(), z, NablaRealisation::Moduli).apply(Ftau)[0];
  CHECK(rel(apply_graph(fr, make_graph({-1}), c), nablaF) < 1e-6);

  CHECK(rel(apply_Dn(fr, c).value, apply_D1_closed(ctx(), c, *F, z)) < 1e-13);
}

TEST_CASE("D_2 against its closed form") {
  const Surface& s = ctx().surface();
  const Complex c(1.0, 0.0), z1 = zs[0], z2 = zs[1];
  const auto F = theta2();
  const MeromorphicFamily d1{[c, F](const SurfaceContext& x, std::span<const Complex> y) {
                               return apply_D1_closed(x, c, *F, y[0]);
                             },
                             {2}};
  const NablaOperator op(stencil(), z2, NablaRealisation::Moduli);
  const std::vector<Complex> one{z1};
  const Complex closed = nabla_form(op, d1, one).value +
                         c / 12.0 * projective_connection(s, z2).value * apply_D1_closed(ctx(), c, *F, z1) +
                         0.5 * c * omega_N(s, 2, z1, z2).value * F->value(ctx().tau());
  const Complex d2 = apply_Dn(ctx(), c, *F, {z1, z2}).value;
  CHECK(rel(d2, closed) < 1e-5);
  CHECK(rel(apply_Dn(ctx(), c, *F, {z2, z1}).value, d2) < 1e-7);
}

TEST_CASE("D_n is symmetric in its points") {
  const auto F = theta2();
  const Complex c(0.7, 0.2);
  for (int n = 2; n <= 3; ++n) {
    std::vector<Complex> z(zs.begin(), zs.begin() + n);
    const Complex ref = apply_Dn(ctx(), c, *F, z).value;
    std::sort(z.begin(), z.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
    do {
      CHECK(rel(apply_Dn(ctx(), c, *F, z).value, ref) < 1e-10);
    } while (std::next_permutation(z.begin(), z.end(), [](Complex a, Complex b) { return a.real() < b.real(); }));
  }
}

TEST_CASE("graph weights scale as c^L") {
  const auto F = theta2();
  const std::vector<Complex> z(zs.begin(), zs.begin() + 3);
  const GraphFrame fr = make_frame(ctx().surface(), ctx().tau(), ctx().periods().index_set_K, z, *F);
  const auto graphs = enumerate_graphs(3);
  const auto r1 = apply_Dn(fr, 1.0), r2 = apply_Dn(fr, 2.0);
  for (std::size_t i = 0; i < graphs.size(); ++i)
    CHECK(rel(r2.per_graph[i], std::pow(2.0, graphs[i].cycle_count()) * r1.per_graph[i]) < 1e-13);
}

TEST_CASE("c-grading of D_n by Vandermonde extraction") {
  const auto F = theta2();
  const int n = 3;
  const std::vector<Complex> z(zs.begin(), zs.begin() + n);
  const GraphFrame fr = make_frame(ctx().surface(), ctx().tau(), ctx().periods().index_set_K, z, *F);
  const auto graphs = enumerate_graphs(n);
  CMatrix V(n + 1, n + 1);
  CVector rhs(n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int k = 0; k <= n; ++k) V(i, k) = std::pow(static_cast<double>(i), k);
    rhs(i) = apply_Dn(fr, static_cast<double>(i)).value;
  }
  const CVector coeff = V.fullPivLu().solve(rhs);
  const auto at2 = apply_Dn(fr, 2.0);
  for (int k = 0; k <= n; ++k) {
    Complex expect = 0.0;
    for (std::size_t i = 0; i < graphs.size(); ++i)
      if (graphs[i].cycle_count() == k) expect += at2.per_graph[i];
    CHECK(std::abs(coeff(k) - expect / std::pow(2.0, k)) < 1e-9 * std::abs(rhs(n)));
  }
  Complex cycle_free = 0.0;
  for (std::size_t i = 0; i < graphs.size(); ++i)
    if (graphs[i].cycle_count() == 0) cycle_free += at2.per_graph[i];
  CHECK(rel(apply_Dn(fr, 0.0).value, cycle_free) < 1e-13);
}

TEST_CASE("nabla of a single chain weight") {
  const Surface& s = ctx().surface();
  const auto F = theta2();
  const auto& K = ctx().periods().index_set_K;
  const Complex x = zs[0], y = zs[1], z = zs[2];
  // Delta_1(x|y) F as a (1, 1) form.
  const MeromorphicFamily delta1{[F](const SurfaceContext& c, std::span<const Complex> p) {
                                   const auto nx = nu_all(c.surface(), p[0]), ny = nu_all(c.surface(), p[1]);
                                   Complex t = 0.0;
                                   for (const auto& [a, b] : c.periods().index_set_K)
                                     t += nx[a - 1] * ny[b - 1] * F->derivative(c.tau(), {{a, b}});
                                   return t;
                                 },
                                 {1, 1}};
  const NablaOperator op(stencil(), z, NablaRealisation::Moduli);
  const std::vector<Complex> xy{x, y};
  const Complex lhs = nabla_form(op, delta1, xy).value;

  const auto nx = nu_all(s, x), ny = nu_all(s, y), nz = nu_all(s, z);
  const CMatrix& tau = ctx().tau();
  Complex d2 = 0.0, d1zy = 0.0, d1xz = 0.0;
  for (const auto& [a, b] : K) {
    const Complex dF = F->derivative(tau, {{a, b}});
    d1zy += nz[a - 1] * ny[b - 1] * dF;
    d1xz += nx[a - 1] * nz[b - 1] * dF;
    for (const auto& [p, q] : K) d2 += nx[a - 1] * ny[b - 1] * nz[p - 1] * nz[q - 1] * F->derivative(tau, {{a, b}, {p, q}});
  }
  const Complex rhs = d2 + omega(s, z, x).value * d1zy + omega(s, y, z).value * d1xz;
  CHECK(rel(lhs, rhs) < 1e-4);
}

TEST_CASE("recursion n = 0") {
  const auto poly = polynomial_supplier(2, {{1.0, {{{1, 1}, 1}, {{2, 2}, 1}}}, {Complex(0.5, 1.0), {{{1, 2}, 2}}}});
  for (Complex c : {Complex(0.0), Complex(1.0)}) {
    const auto r = verify_recursion(stencil(), c, theta2(), {zs[0]});
    MESSAGE("n=0 theta c=" << c << " residual " << r.residual << " floor " << r.noise_floor);
    CHECK(r.residual < 1e-6);
    const auto rp = verify_recursion(stencil(), c, poly, {zs[1]});
    CHECK(rp.residual < 1e-6);
  }
}

TEST_CASE("recursion n = 1") {
  const auto r = verify_recursion(stencil(), 1.0, theta2(), {zs[0], zs[1]});
  MESSAGE("n=1 theta residual " << r.residual << " floor " << r.noise_floor);
  CHECK(r.residual < 1e-4);
  const auto poly = polynomial_supplier(2, {{1.0, {{{1, 1}, 1}, {{2, 2}, 1}}}});
  const auto rp = verify_recursion(stencil(), 0.0, poly, {zs[2], zs[3]});
  MESSAGE("n=1 poly residual " << rp.residual);
  CHECK(rp.residual < 1e-5);
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(verify_recursion(stencil(), 1.0, theta2(), {}), Error);
  const GraphFrame fr = make_frame(ctx().surface(), ctx().tau(), ctx().periods().index_set_K, {zs[0]}, *theta2());
  CHECK_THROWS_AS(apply_graph(fr, make_graph({1, 0}), 1.0), Error);
  CHECK_THROWS_AS(fr.derivative({{1, 1}, {1, 2}}), Error);
}
