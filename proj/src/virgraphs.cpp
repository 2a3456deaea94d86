#include "genusg/virgraphs.hpp"

#include <algorithm>
#include <cmath>

#include "genusg/parallel.hpp"

namespace genusg {

std::vector<std::pair<int, int>> VirasoroGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i)
    if (mapping[i] >= 0) out.emplace_back(i, mapping[i]);
  return out;
}

std::vector<std::pair<int, int>> VirasoroGraph::chain_endpoints() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& ch : chains) out.emplace_back(ch.front(), ch.back());
  return out;
}

VirasoroGraph make_graph(std::vector<int> mapping) {
  VirasoroGraph g;
  g.n = static_cast<int>(mapping.size());
  std::vector<int> pre(g.n, -1);
  for (int i = 0; i < g.n; ++i) {
    const int j = mapping[i];
    if (j < -1 || j >= g.n) throw Error(ErrorKind::InvalidInput, "graph mapping out of range");
    if (j < 0) continue;
    if (pre[j] >= 0) throw Error(ErrorKind::InvalidInput, "graph mapping is not injective");
    pre[j] = i;
  }
  std::vector<bool> seen(g.n, false);
  for (int i = 0; i < g.n; ++i) {
    if (pre[i] >= 0) continue;
    std::vector<int> chain;
    for (int v = i; v >= 0; v = mapping[v]) {
      chain.push_back(v);
      seen[v] = true;
    }
    g.chains.push_back(std::move(chain));
  }
  for (int i = 0; i < g.n; ++i) {
    if (seen[i]) continue;
    std::vector<int> cycle;
    for (int v = i; !seen[v]; v = mapping[v]) {
      cycle.push_back(v);
      seen[v] = true;
    }
    g.cycles.push_back(std::move(cycle));
  }
  std::sort(g.chains.begin(), g.chains.end());
  g.mapping = std::move(mapping);
  return g;
}

std::uint64_t graph_count(int n) {
  if (n < 0) return 0;
  std::uint64_t total = 0;
  for (int i = 0; i <= n; ++i) {
    std::uint64_t binom = 1, fact = 1;
    for (int k = 1; k <= i; ++k) {
      binom = binom * (n - k + 1) / k;
      fact *= k;
    }
    total += fact * binom * binom;
  }
  return total;
}

std::vector<VirasoroGraph> enumerate_graphs(int n) {
  if (n < 0 || n > 8) throw Error(ErrorKind::InvalidInput, "enumerate_graphs supports 0 <= n <= 8");
  std::vector<VirasoroGraph> out;
  out.reserve(graph_count(n));
  std::vector<int> mapping(n, -1);
  std::vector<bool> used(n, false);
  auto recurse = [&](auto&& self, int i) -> void {
    if (i == n) {
      out.push_back(make_graph(mapping));
      return;
    }
    mapping[i] = -1;
    self(self, i + 1);
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      used[j] = true;
      mapping[i] = j;
      self(self, i + 1);
      used[j] = false;
    }
    mapping[i] = -1;
  };
  recurse(recurse, 0);
  return out;
}

FormValue edge_weight(const Surface& s, Complex zi, Complex zj, bool same_vertex) {
  if (same_vertex) return projective_connection(s, zi) * (1.0 / 6.0);
  return omega(s, zi, zj);
}

std::vector<PairMultiset> multisets_up_to(const std::vector<IndexPair>& K, int order) {
  std::vector<PairMultiset> out{{}};
  std::vector<PairMultiset> layer{{}};
  std::vector<std::size_t> last{0};
  for (int m = 1; m <= order; ++m) {
    std::vector<PairMultiset> next;
    std::vector<std::size_t> next_last;
    for (std::size_t i = 0; i < layer.size(); ++i)
      for (std::size_t k = last[i]; k < K.size(); ++k) {
        PairMultiset ms = layer[i];
        ms.push_back(K[k]);
        next.push_back(std::move(ms));
        next_last.push_back(k);
      }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
    last = std::move(next_last);
  }
  return out;
}

Complex GraphFrame::derivative(PairMultiset pairs) const {
  for (auto& p : pairs) p = normalise_pair(p);
  std::sort(pairs.begin(), pairs.end());
  const auto it = derivatives.find(pairs);
  if (it == derivatives.end()) throw Error(ErrorKind::InvalidInput, "derivative not tabulated in the frame");
  return it->second;
}

GraphFrame make_frame(const Surface& s, const CMatrix& tau, const std::vector<IndexPair>& K,
                      const std::vector<Complex>& zs, const ModuliFunction& F) {
  if (K.empty()) throw Error(ErrorKind::InvalidInput, "empty index set K (genus must be 2 or 3)");
  const int n = static_cast<int>(zs.size()), g = s.genus();
  GraphFrame fr;
  fr.K = K;
  fr.edge = CMatrix(n, n);
  fr.nu = CMatrix(n, g);
  for (int i = 0; i < n; ++i) {
    const auto v = nu_all(s, zs[i]);
    for (int a = 0; a < g; ++a) fr.nu(i, a) = v[a];
    for (int j = i; j < n; ++j) fr.edge(i, j) = fr.edge(j, i) = edge_weight(s, zs[i], zs[j], i == j).value;
  }
  const auto sets = multisets_up_to(K, n);
  std::vector<Complex> vals(sets.size());
  parallel_for(sets.size(), [&](std::size_t i) { vals[i] = F.derivative(tau, sets[i]); });
  for (std::size_t i = 0; i < sets.size(); ++i) {
    PairMultiset key = sets[i];
    for (auto& p : key) p = normalise_pair(p);
    std::sort(key.begin(), key.end());
    fr.derivatives.emplace(std::move(key), vals[i]);
  }
  return fr;
}

Complex apply_graph(const GraphFrame& frame, const VirasoroGraph& graph, Complex c) {
  if (graph.n != frame.points()) throw Error(ErrorKind::InvalidInput, "graph order does not match the frame");
  Complex w = std::pow(0.5 * c, graph.cycle_count());
  for (const auto& [i, j] : graph.edges()) w *= frame.edge(i, j);
  const auto ends = graph.chain_endpoints();
  const std::size_t M = ends.size(), nk = frame.K.size();
  std::vector<std::size_t> idx(M, 0);
  Complex chains = 0.0;
  while (true) {
    Complex term = 1.0;
    PairMultiset ms;
    for (std::size_t m = 0; m < M; ++m) {
      const auto [a, b] = frame.K[idx[m]];
      term *= frame.nu(ends[m].first, a - 1) * frame.nu(ends[m].second, b - 1);
      ms.push_back(frame.K[idx[m]]);
    }
    chains += term * frame.derivative(std::move(ms));
    std::size_t k = 0;
    while (k < M && ++idx[k] == nk) idx[k++] = 0;
    if (k == M) break;
  }
  return w * chains;
}

DnResult apply_Dn(const GraphFrame& frame, Complex c) {
  const auto graphs = enumerate_graphs(frame.points());
  DnResult r{0.0, std::vector<Complex>(graphs.size())};
  parallel_for(graphs.size(), [&](std::size_t i) { r.per_graph[i] = apply_graph(frame, graphs[i], c); });
  CompensatedSum sum;
  for (Complex v : r.per_graph) sum.add(v);
  r.value = sum.value();
  return r;
}

DnResult apply_Dn(const SurfaceContext& ctx, Complex c, const ModuliFunction& F, const std::vector<Complex>& zs) {
  const auto& pm = ctx.periods();
  return apply_Dn(make_frame(ctx.surface(), pm.tau, pm.index_set_K, zs, F), c);
}

Complex apply_D1_closed(const SurfaceContext& ctx, Complex c, const ModuliFunction& F, Complex z) {
  const Surface& s = ctx.surface();
  const auto& pm = ctx.periods();
  const auto v = nu_all(s, z);
  Complex total = c / 12.0 * projective_connection(s, z).value * F.value(pm.tau);
  for (const auto& [a, b] : pm.index_set_K) total += v[a - 1] * v[b - 1] * F.derivative(pm.tau, {{a, b}});
  return total;
}

MeromorphicFamily dn_family(Complex c, ModuliFunctionPtr F, int n) {
  return {[c, F](const SurfaceContext& ctx, std::span<const Complex> y) {
            return apply_Dn(ctx, c, *F, std::vector<Complex>(y.begin(), y.end())).value;
          },
          std::vector<int>(n, 2)};
}

RecursionReport verify_recursion(const ParameterStencil& st, Complex c, ModuliFunctionPtr F,
                                 const std::vector<Complex>& zs, NablaRealisation kind) {
  if (zs.empty()) throw Error(ErrorKind::InvalidInput, "verify_recursion needs n + 1 >= 1 points");
  const int n = static_cast<int>(zs.size()) - 1;
  const SurfaceContext& base = st.base();
  const Surface& s = base.surface();
  const Complex znew = zs.back();
  const std::vector<Complex> z(zs.begin(), zs.end() - 1);

  RecursionReport rep{};
  rep.lhs = apply_Dn(base, c, *F, zs).value;

  const NablaOperator op(st, znew, kind);
  const Complex Dn = apply_Dn(base, c, *F, z).value;
  Complex rhs = nabla_form(op, dn_family(c, F, n), z).value;
  rhs += c / 12.0 * projective_connection(s, znew).value * Dn;
  for (int k = 0; k < n; ++k) {
    std::vector<Complex> rest = z;
    rest.erase(rest.begin() + k);
    rhs += 0.5 * c * omega_N(s, 2, z[k], znew).value * apply_Dn(base, c, *F, rest).value;
  }
  rep.rhs = rhs;
  rep.residual = std::abs(rep.lhs - rhs) / std::abs(rep.lhs);

  // Round-off of ~1e-13 relative in each sampled value, divided by the step.
  double floor = 0.0;
  const auto& coeff = op.coefficients();
  for (int d = 0; d < 3 * s.genus(); ++d) {
    const ParameterDirection dir{d / 3 + 1, d % 3};
    const double scale = dir.l == 0 ? 1.0 : std::abs(s.params().rho(dir.a));
    floor += std::abs(coeff[d]) * scale * 1e-13 * std::abs(Dn) / st.step(dir);
  }
  rep.noise_floor = floor / std::abs(rep.lhs);
  return rep;
}

}  // namespace genusg
