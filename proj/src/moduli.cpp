#include "genusg/moduli.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"

#include "genusg/parallel.hpp"

namespace genusg {

IndexPair normalise_pair(IndexPair p) {
  if (p.first > p.second) std::swap(p.first, p.second);
  return p;
}

void check_derivative_request(const ModuliFunction& f, const CMatrix& tau, const PairMultiset& pairs) {
  const int g = f.genus();
  if (tau.rows() != g || tau.cols() != g) throw Error(ErrorKind::InvalidInput, "tau has the wrong size");
  if (f.max_order() >= 0 && static_cast<int>(pairs.size()) > f.max_order())
    throw Error(ErrorKind::InvalidInput, "derivative order " + std::to_string(pairs.size()) +
                                             " unsupported by " + f.name());
  for (const auto& [a, b] : pairs)
    if (a < 1 || b < 1 || a > g || b > g) throw Error(ErrorKind::InvalidInput, "derivative index out of range");
}

// ---------------------------------------------------------------------------

EvenLattice::EvenLattice(Eigen::MatrixXi gram) : gram_(std::move(gram)) {
  if (gram_.rows() == 0 || gram_.rows() != gram_.cols())
    throw Error(ErrorKind::InvalidInput, "Gram matrix must be square and nonempty");
  if (gram_ != gram_.transpose()) throw Error(ErrorKind::InvalidInput, "Gram matrix must be symmetric");
  for (int i = 0; i < gram_.rows(); ++i)
    if (gram_(i, i) % 2 != 0) throw Error(ErrorKind::InvalidInput, "lattice is not even");
  Eigen::LLT<Eigen::MatrixXd> llt(gram_.cast<double>());
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidInput, "Gram matrix is not positive definite");
  for (double bound = 2.0;; bound *= 2.0) {
    int best = 0;
    for (const auto& n : vectors_up_to(bound)) {
      const int norm = n.dot(gram_ * n);
      if (norm > 0 && (best == 0 || norm < best)) best = norm;
    }
    if (best > 0) {
      minimum_ = best;
      break;
    }
  }
}

EvenLattice EvenLattice::sqrt2() { return EvenLattice(Eigen::MatrixXi::Constant(1, 1, 2)); }

EvenLattice EvenLattice::e8() {
  // Cartan matrix: chain 0-1-2-3-4-5-6 with node 7 attached to node 4.
  Eigen::MatrixXi g = 2 * Eigen::MatrixXi::Identity(8, 8);
  for (int i = 0; i + 1 < 7; ++i) g(i, i + 1) = g(i + 1, i) = -1;
  g(4, 7) = g(7, 4) = -1;
  return EvenLattice(g);
}

std::vector<Eigen::VectorXi> EvenLattice::vectors_up_to(double bound) const {
  // Fincke–Pohst: n^T G n = sum_i q_ii (n_i + sum_{j>i} q_ij n_j)^2.
  const int r = rank();
  const Eigen::MatrixXd R = gram_.cast<double>().llt().matrixU();
  Eigen::MatrixXd q(r, r);
  for (int i = 0; i < r; ++i) {
    q(i, i) = R(i, i) * R(i, i);
    for (int j = i + 1; j < r; ++j) q(i, j) = R(i, j) / R(i, i);
  }
  std::vector<Eigen::VectorXi> out;
  Eigen::VectorXi n = Eigen::VectorXi::Zero(r);
  const double slack = 1e-9 * std::max(1.0, bound);
  auto recurse = [&](auto&& self, int i, double remaining) -> void {
    double centre = 0.0;
    for (int j = i + 1; j < r; ++j) centre -= q(i, j) * n(j);
    const double half = std::sqrt(std::max(0.0, remaining + slack) / q(i, i));
    for (int k = static_cast<int>(std::ceil(centre - half)); k <= static_cast<int>(std::floor(centre + half)); ++k) {
      n(i) = k;
      const double rest = remaining - q(i, i) * (k - centre) * (k - centre);
      if (rest < -slack) continue;
      if (i == 0)
        out.push_back(n);
      else
        self(self, i - 1, rest);
    }
    n(i) = 0;
  };
  recurse(recurse, r - 1, bound);
  return out;
}

// ---------------------------------------------------------------------------

ThetaSum siegel_theta(const EvenLattice& lattice, const CMatrix& tau, const PairMultiset& pairs,
                      const ThetaOptions& options) {
  const int g = static_cast<int>(tau.rows());
  if (g < 1 || tau.cols() != g) throw Error(ErrorKind::InvalidInput, "tau must be square");
  for (const auto& [a, b] : pairs)
    if (a < 1 || b < 1 || a > g || b > g) throw Error(ErrorKind::InvalidInput, "derivative index out of range");
  const Eigen::MatrixXd im = (tau / kTwoPiI).imag();
  const double mu = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (im + im.transpose())).eigenvalues()(0);
  if (!(mu > 0.0)) throw Error(ErrorKind::Domain, "Im Omega is not positive definite");
  const double R = options.radius ? *options.radius : std::sqrt(std::log(1.0 / options.tail_target) / (kPi * mu));
  ThetaSum result{0.0, std::exp(-kPi * mu * R * R), 0};
  if (result.tail_bound > 1e-12) throw Error(ErrorKind::NotConverged, "theta radius too small for a 1e-12 tail");

  const auto vecs = lattice.vectors_up_to(R * R);
  const std::size_t V = vecs.size();
  double total = 1.0;
  for (int a = 0; a < g; ++a) total *= static_cast<double>(V);
  if (total > static_cast<double>(options.max_terms))
    throw Error(ErrorKind::NumericalGuard, "theta series needs too many lattice tuples");
  result.terms = static_cast<std::size_t>(total);

  const int r = lattice.rank();
  Eigen::MatrixXi vmat(r, V), gv(r, V);
  for (std::size_t i = 0; i < V; ++i) vmat.col(i) = vecs[i];
  gv = lattice.gram() * vmat;
  const bool table = V * V <= (std::size_t{1} << 22);
  const Eigen::MatrixXi dots = table ? Eigen::MatrixXi(vmat.transpose() * gv) : Eigen::MatrixXi();
  const auto dot = [&](std::size_t i, std::size_t j) {
    return table ? dots(i, j) : vmat.col(i).dot(gv.col(j));
  };
  std::vector<IndexPair> ps;
  for (const auto& p : pairs) ps.push_back(normalise_pair(p));

  // Parallel over the first vector of the tuple; the rest by odometer.
  std::vector<Complex> partial(V);
  parallel_for(V, [&](std::size_t first) {
    CompensatedSum acc;
    std::vector<std::size_t> idx(g, 0);
    idx[0] = first;
    while (true) {
      Complex e = 0.0;
      for (int a = 0; a < g; ++a) {
        e += 0.5 * tau(a, a) * static_cast<double>(dot(idx[a], idx[a]));
        for (int b = a + 1; b < g; ++b) e += tau(a, b) * static_cast<double>(dot(idx[a], idx[b]));
      }
      double factor = 1.0;
      for (const auto& [a, b] : ps) {
        const double d = dot(idx[a - 1], idx[b - 1]);
        factor *= a == b ? 0.5 * d : d;
      }
      if (factor != 0.0) acc.add(factor * std::exp(e));
      int k = 1;
      while (k < g && ++idx[k] == V) idx[k++] = 0;
      if (k == g) break;
    }
    partial[first] = acc.value();
  });
  CompensatedSum sum;
  for (Complex v : partial) sum.add(v);
  result.value = sum.value();
  return result;
}

namespace {

class ThetaSupplier final : public ModuliFunction {
 public:
  ThetaSupplier(EvenLattice lattice, int genus, ThetaOptions options)
      : lattice_(std::move(lattice)), genus_(genus), options_(options) {}

  int genus() const override { return genus_; }
  std::optional<double> weight() const override { return 0.5 * lattice_.rank(); }
  std::string name() const override { return "lattice theta (rank " + std::to_string(lattice_.rank()) + ")"; }

  Complex derivative(const CMatrix& tau, const PairMultiset& pairs) const override {
    check_derivative_request(*this, tau, pairs);
    return siegel_theta(lattice_, tau, pairs, options_).value;
  }

 private:
  EvenLattice lattice_;
  int genus_;
  ThetaOptions options_;
};

class PolynomialSupplier final : public ModuliFunction {
 public:
  PolynomialSupplier(int genus, std::vector<Monomial> terms) : genus_(genus) {
    for (auto& m : terms) {
      std::map<IndexPair, int> merged;
      for (const auto& [p, e] : m.powers) {
        const IndexPair q = normalise_pair(p);
        if (q.first < 1 || q.second > genus || e < 0)
          throw Error(ErrorKind::InvalidInput, "polynomial term out of range");
        merged[q] += e;
      }
      terms_.push_back({m.coefficient, std::move(merged)});
    }
  }

  int genus() const override { return genus_; }
  std::string name() const override { return "polynomial"; }

  Complex derivative(const CMatrix& tau, const PairMultiset& pairs) const override {
    check_derivative_request(*this, tau, pairs);
    std::map<IndexPair, int> order;
    for (const auto& p : pairs) ++order[normalise_pair(p)];
    Complex total = 0.0;
    for (const auto& t : terms_) {
      Complex v = t.coefficient;
      for (const auto& [p, k] : order) {
        const auto it = t.powers.find(p);
        const int e = it == t.powers.end() ? 0 : it->second;
        if (k > e) {
          v = 0.0;
          break;
        }
        for (int i = 0; i < k; ++i) v *= static_cast<double>(e - i);
      }
      if (v == Complex(0.0)) continue;
      for (const auto& [p, e] : t.powers) {
        const auto it = order.find(p);
        const int left = e - (it == order.end() ? 0 : it->second);
        for (int i = 0; i < left; ++i) v *= tau(p.first - 1, p.second - 1);
      }
      total += v;
    }
    return total;
  }

 private:
  struct Term {
    Complex coefficient;
    std::map<IndexPair, int> powers;
  };
  int genus_;
  std::vector<Term> terms_;
};

EvenLattice lattice_from_json(const nlohmann::json& j) {
  const auto& rows = j.is_object() ? j.at("gram") : j;
  const int r = static_cast<int>(rows.size());
  Eigen::MatrixXi g(r, r);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows.at(i).size()) != r) throw Error(ErrorKind::InvalidInput, "Gram matrix is not square");
    for (int k = 0; k < r; ++k) g(i, k) = rows.at(i).at(k).get<int>();
  }
  return EvenLattice(g);
}

}  // namespace

ModuliFunctionPtr theta_supplier(EvenLattice lattice, int genus, ThetaOptions options) {
  if (genus < 1) throw Error(ErrorKind::InvalidInput, "genus must be positive");
  return std::make_shared<ThetaSupplier>(std::move(lattice), genus, options);
}

ModuliFunctionPtr polynomial_supplier(int genus, std::vector<Monomial> terms) {
  if (genus < 1) throw Error(ErrorKind::InvalidInput, "genus must be positive");
  return std::make_shared<PolynomialSupplier>(genus, std::move(terms));
}

ModuliFunctionPtr parse_supplier(const std::string& spec, int genus) {
  try {
    if (spec == "lattice:sqrt2") return theta_supplier(EvenLattice::sqrt2(), genus);
    if (spec == "lattice:e8") return theta_supplier(EvenLattice::e8(), genus);
    if (spec.rfind("lattice:file=", 0) == 0) {
      std::ifstream in(spec.substr(13));
      if (!in) throw Error(ErrorKind::InvalidInput, "cannot open lattice file " + spec.substr(13));
      return theta_supplier(lattice_from_json(nlohmann::json::parse(in)), genus);
    }
    if (spec.rfind("poly:", 0) == 0) {
      std::vector<Monomial> terms;
      for (const auto& t : nlohmann::json::parse(spec.substr(5))) {
        Monomial m{{t.at("coef").at(0).get<double>(), t.at("coef").at(1).get<double>()}, {}};
        for (const auto& p : t.at("powers"))
          m.powers.push_back({{p.at(0).get<int>(), p.at(1).get<int>()}, p.at(2).get<int>()});
        terms.push_back(std::move(m));
      }
      return polynomial_supplier(genus, std::move(terms));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("bad supplier description: ") + e.what());
  }
  throw Error(ErrorKind::InvalidInput, "unknown supplier '" + spec + "'");
}

}  // namespace genusg
