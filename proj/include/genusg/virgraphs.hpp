#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "genusg/differentials.hpp"
#include "genusg/moduli.hpp"
#include "genusg/variations.hpp"

namespace genusg {

/// A Virasoro graph on vertices 0..n-1: an injective partial map, vertex i -> mapping[i] (-1 if none).
struct VirasoroGraph {
  int n = 0;
  std::vector<int> mapping;
  std::vector<std::vector<int>> cycles;  // each listed from its smallest vertex
  std::vector<std::vector<int>> chains;  // start (no preimage) to end (no image); singletons are degenerate

  int cycle_count() const { return static_cast<int>(cycles.size()); }
  int chain_count() const { return static_cast<int>(chains.size()); }
  std::vector<std::pair<int, int>> edges() const;
  /// (x_m, y_m) for every chain.
  std::vector<std::pair<int, int>> chain_endpoints() const;
};

/// Builds the cycle/chain decomposition; throws InvalidInput if the map is not injective.
VirasoroGraph make_graph(std::vector<int> mapping);

/// sum_{i=0}^{n} i! C(n, i)^2.
std::uint64_t graph_count(int n);

/// All partial permutations of {0..n-1}, n <= 8.
std::vector<VirasoroGraph> enumerate_graphs(int n);

/// E(z_i, z_j): s(z_i)/6 on the diagonal, omega(z_i, z_j) otherwise.
FormValue edge_weight(const Surface& s, Complex zi, Complex zj, bool same_vertex);

/// Sorted multisets of size <= order drawn from K.
std::vector<PairMultiset> multisets_up_to(const std::vector<IndexPair>& K, int order);

/// Point data and F-derivatives needed to weigh graphs at a fixed set of points.
struct GraphFrame {
  std::vector<IndexPair> K;
  CMatrix edge;  // n x n edge weights
  CMatrix nu;    // n x g, nu_a(z_i)
  std::map<PairMultiset, Complex> derivatives;  // keyed by sorted multiset

  int points() const { return static_cast<int>(edge.rows()); }
  Complex derivative(PairMultiset pairs) const;
};

/// Evaluates edge weights, nu and all derivatives of F up to order zs.size() at tau.
GraphFrame make_frame(const Surface& s, const CMatrix& tau, const std::vector<IndexPair>& K,
                      const std::vector<Complex>& zs, const ModuliFunction& F);

/// (c/2)^L prod E * Delta_M applied to F, read off the frame.
Complex apply_graph(const GraphFrame& frame, const VirasoroGraph& graph, Complex c);

struct DnResult {
  Complex value;
  std::vector<Complex> per_graph;  // in enumerate_graphs order
};

/// D_n(z) F = sum over graphs, n = frame.points().
DnResult apply_Dn(const GraphFrame& frame, Complex c);
/// Convenience: frame from a surface context (tau from its period matrix).
DnResult apply_Dn(const SurfaceContext& ctx, Complex c, const ModuliFunction& F, const std::vector<Complex>& zs);

/// D_1(z) F = (nabla_M(z) + (c/12) s(z)) F with nabla_M = sum_K nu_a nu_b d_ab.
Complex apply_D1_closed(const SurfaceContext& ctx, Complex c, const ModuliFunction& F, Complex z);

/// The family H(z_1..z_n) = D_n(z) F as a meromorphic form of weights (2, .., 2).
MeromorphicFamily dn_family(Complex c, ModuliFunctionPtr F, int n);

struct RecursionReport {
  Complex lhs;
  Complex rhs;
  double residual;     // |lhs - rhs| / |lhs|
  double noise_floor;  // rough relative size of FD round-off in the nabla term
};

/// D_{n+1}(z, z_{n+1}) F against (nabla^(2..2)_{z}(z_{n+1}) + (c/12) s(z_{n+1})) D_n(z) F
/// + (c/2) sum_k omega_2(z_k, z_{n+1}) D_{n-1}(.., z_k omitted, ..) F. zs holds n+1 points.
RecursionReport verify_recursion(const ParameterStencil& st, Complex c, ModuliFunctionPtr F,
                                 const std::vector<Complex>& zs,
                                 NablaRealisation kind = NablaRealisation::Moduli);

}  // namespace genusg
