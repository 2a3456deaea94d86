#include "genusg/commands.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "genusg/modular.hpp"
#include "genusg/parallel.hpp"
#include "genusg/virgraphs.hpp"

namespace genusg {

using nlohmann::json;

namespace {

Error bad(const std::string& what) { return Error(ErrorKind::InvalidInput, what); }

Complex complex_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_string()) return parse_complex(j.get<std::string>());
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw bad(what + " must be [re, im]");
}

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(to_json(m(i, j)));
    rows.push_back(r);
  }
  return rows;
}

json int_matrix_json(const IMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Residual bookkeeping shared by every command.
class Report {
 public:
  Report(const std::string& command, const RunConfig* cfg) {
    body_["command"] = command;
    if (cfg) {
      body_["config"] = cfg->to_json();
      body_["config_hash"] = cfg->hash();
    }
    body_["residuals"] = json::object();
    body_["tolerances"] = json::object();
  }

  void residual(const std::string& name, double value, double tolerance) {
    body_["residuals"][name] = value;
    body_["tolerances"][name] = tolerance;
    if (!(value <= tolerance)) pass_ = false;
  }
  void fail() { pass_ = false; }
  json& operator[](const std::string& key) { return body_[key]; }

  CommandResult finish() {
    body_["pass"] = pass_;
    return {pass_ ? 0 : 1, std::move(body_)};
  }

 private:
  json body_;
  bool pass_ = true;
};

json truncation_json(const Surface& s, Complex x, Complex y) {
  const auto d = omega_diagnostics(s, x, y);
  return {{"max_word_length", s.policy().max_word_length},
          {"tail_tol", s.policy().tail_tol},
          {"mode", s.policy().mode == TruncationMode::Fixed ? "fixed" : "adaptive"},
          {"shells_used", d.shells_used},
          {"last_shell_magnitude", d.last_shell_magnitude},
          {"total_magnitude", d.total_magnitude},
          {"probe", {to_json(x), to_json(y)}}};
}

// Points on the circle |z| = 6, redrawn if they come near a disc.
std::vector<Complex> seeded_points(const Surface& s, std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::vector<Complex> out;
  for (int tries = 0; static_cast<int>(out.size()) < n; ++tries) {
    if (tries > 1000 * (n + 1)) throw Error(ErrorKind::NumericalGuard, "no admissible points on the |z| = 6 circle");
    const Complex z = std::polar(6.0, angle(rng));
    if (!s.in_any_disc(z, 1.5)) out.push_back(z);
  }
  return out;
}

std::vector<Complex> points_option(const json& opt, const Surface& s, std::mt19937_64& rng, int n,
                                   const std::string& key = "points") {
  if (!opt.contains(key) || opt[key].is_null()) return seeded_points(s, rng, n);
  std::vector<Complex> pts;
  if (opt[key].is_string()) {
    pts = parse_points(opt[key].get<std::string>());
  } else if (opt[key].is_array()) {
    for (const auto& p : opt[key]) pts.push_back(complex_from_json(p, key));
  } else {
    throw bad(key + " must be a string or a list");
  }
  if (static_cast<int>(pts.size()) != n)
    throw bad(key + " needs " + std::to_string(n) + " points, got " + std::to_string(pts.size()));
  return pts;
}

int int_option(const json& opt, const std::string& key, int fallback) {
  if (!opt.contains(key) || opt[key].is_null()) return fallback;
  if (!opt[key].is_number_integer()) throw bad(key + " must be an integer");
  return opt[key].get<int>();
}

Complex complex_option(const json& opt, const std::string& key, Complex fallback) {
  if (!opt.contains(key) || opt[key].is_null()) return fallback;
  return complex_from_json(opt[key], key);
}

std::string string_option(const json& opt, const std::string& key, const std::string& fallback) {
  if (!opt.contains(key) || opt[key].is_null()) return fallback;
  if (!opt[key].is_string()) throw bad(key + " must be a string");
  return opt[key].get<std::string>();
}

CommandResult cmd_validate(const RunConfig& cfg, const json&) {
  Report r("validate", &cfg);
  const auto v = validate(cfg.params);
  json violations = json::array();
  for (const auto& d : v.violations) violations.push_back({{"a", d.a}, {"b", d.b}, {"margin", d.margin}});
  r["validation"] = {{"pass", v.pass}, {"min_margin", v.min_margin}, {"violations", violations}};
  if (!v.pass) {
    r.fail();
    return r.finish();
  }
  json handles = json::array();
  for (const auto& h : derive_handle_data(cfg.params))
    handles.push_back({{"q", to_json(h.q)}, {"W", to_json(h.W)}, {"W_neg", to_json(h.W_neg)}});
  r["handles"] = handles;
  return r.finish();
}

CommandResult cmd_differentials(const RunConfig& cfg, const json& opt) {
  Report r("differentials", &cfg);
  const SurfaceContext ctx{Surface(cfg.params, cfg.policy)};
  const Surface& s = ctx.surface();
  std::mt19937_64 rng(cfg.seed);
  const auto pts = points_option(opt, s, rng, 2, "at");
  const Complex x = pts[0], y = pts[1];
  r["at"] = {to_json(x), to_json(y)};
  const Complex w = omega(s, x, y).value;
  r["omega"] = to_json(w);
  r["s"] = to_json(projective_connection(s, x).value);
  json nus = json::array();
  for (Complex v : nu_all(s, x)) nus.push_back(to_json(v));
  r["nu"] = nus;
  r["tau"] = matrix_json(ctx.tau());
  r["truncation"] = truncation_json(s, x, y);
  r.residual("omega_symmetry", std::abs(w - omega(s, y, x).value) / std::abs(w), 1e-9);
  return r.finish();
}

CommandResult cmd_period_matrix(const RunConfig& cfg, const json&) {
  Report r("period-matrix", &cfg);
  const Surface s(cfg.params, cfg.policy);
  const PeriodMatrix pm = period_matrix(s, true);
  r["tau"] = matrix_json(pm.tau);
  r["omega_matrix"] = matrix_json(pm.omega());
  json K = json::array();
  for (const auto& [a, b] : pm.index_set_K) K.push_back({a, b});
  r["index_set_K"] = K;
  const bool pd = imag_positive_definite(pm.omega());
  r["imag_positive_definite"] = pd;
  if (!pd) r.fail();
  const double scale = std::max(1.0, pm.tau.cwiseAbs().maxCoeff());
  r.residual("asymmetry", pm.asymmetry / scale, 1e-9);
  r.residual("quadrature_difference", pm.quadrature_difference / scale, 1e-9);
  r["truncation"] = truncation_json(s, Complex(0.0, 6.0), Complex(0.0, -6.0));
  return r.finish();
}

CommandResult cmd_check_identities(const RunConfig& cfg, const json& opt) {
  Report r("check-identities", &cfg);
  const ParameterStencil st(Surface(cfg.params, cfg.policy));
  const Surface& s = st.surface();
  const int g = s.genus();
  std::mt19937_64 rng(cfg.seed);
  const auto pts = points_option(opt, s, rng, 3);
  const Complex x = pts[0], y1 = pts[1], y2 = pts[2];
  r["points"] = {to_json(x), to_json(y1), to_json(y2)};

  const auto grad = st.gradient(tau_family());
  const auto nx = nu_all(s, x);
  const Complex wxy1 = omega(s, x, y1).value;
  const std::vector<Complex> p1{y1}, p12{y1, y2};
  double rauch = 0.0, dnu = 0.0, dom = 0.0, ds = 0.0, agree = 0.0;
  std::vector<Complex> first;
  for (auto kind : {NablaRealisation::Bers, NablaRealisation::Moduli}) {
    const NablaOperator op(st, x, kind);
    std::optional<PsiModuli> psi;
    KernelFunction kernel;
    if (kind == NablaRealisation::Moduli) kernel = psi.emplace(op).as_kernel();
    const auto v = op.contract(grad);
    std::size_t j = 0;
    for (int a = 0; a < g; ++a)
      for (int b = a; b < g; ++b, ++j)
        rauch = std::max(rauch, std::abs(v[j] - nx[a] * nx[b]) / std::abs(nx[a] * nx[b]));
    std::vector<Complex> vals;
    for (int a = 1; a <= g; ++a) {
      const Complex l = nabla_form(op, nu_form(a), p1, kernel).value;
      dnu = std::max(dnu, std::abs(l - wxy1 * nx[a - 1]) / std::abs(l));
      vals.push_back(l);
    }
    const Complex lo = nabla_form(op, omega_form(), p12, kernel).value;
    dom = std::max(dom, std::abs(lo - wxy1 * omega(s, x, y2).value) / std::abs(lo));
    const Complex ls = nabla_form(op, projective_connection_form(), p1, kernel).value / 6.0;
    const Complex rs = wxy1 * wxy1 - omega_N(s, 2, x, y1).value;
    ds = std::max(ds, std::abs(ls - rs) / std::abs(rs));
    vals.push_back(lo);
    vals.push_back(ls);
    if (first.empty()) {
      first = vals;
    } else {
      for (std::size_t k = 0; k < vals.size(); ++k)
        agree = std::max(agree, std::abs(vals[k] - first[k]) / std::abs(first[k]));
    }
  }
  r.residual("rauch", rauch, 1e-6);
  r.residual("nabla_nu", dnu, 1e-6);
  r.residual("nabla_omega", dom, 1e-6);
  r.residual("nabla_s", ds, 1e-6);
  r.residual("realisation_agreement", agree, 1e-6);
  r["truncation"] = truncation_json(s, x, y1);
  return r.finish();
}

json graph_json(const VirasoroGraph& g) {
  json edges = json::array();
  for (const auto& [i, j] : g.edges()) edges.push_back({i, j});
  json ends = json::array();
  for (const auto& [x, y] : g.chain_endpoints()) ends.push_back({x, y});
  return {{"mapping", g.mapping}, {"cycles", g.cycles}, {"chains", g.chains},
          {"cycle_count", g.cycle_count()}, {"edges", edges}, {"chain_endpoints", ends}};
}

CommandResult cmd_graphs(const RunConfig& cfg, const json& opt) {
  Report r("graphs", &cfg);
  const int n = int_option(opt, "n", 2);
  if (n < 0 || n > 8) throw bad("graphs supports 0 <= n <= 8");
  const auto graphs = enumerate_graphs(n);
  r["n"] = n;
  r["count"] = graphs.size();
  r["formula_count"] = graph_count(n);
  std::map<std::pair<int, int>, int> census;
  for (const auto& g : graphs) ++census[{g.cycle_count(), g.chain_count()}];
  json c = json::array();
  for (const auto& [k, v] : census) c.push_back({{"cycles", k.first}, {"chains", k.second}, {"count", v}});
  r["census"] = c;
  const bool list = n <= 6;
  r["graphs_listed"] = list;
  json gs = json::array();
  if (list)
    for (const auto& g : graphs) gs.push_back(graph_json(g));
  r["graphs"] = gs;
  r.residual("count_mismatch", std::abs(static_cast<double>(graphs.size()) - static_cast<double>(graph_count(n))), 0.0);
  return r.finish();
}

CommandResult cmd_virasoro_npoint(const RunConfig& cfg, const json& opt) {
  Report r("virasoro-npoint", &cfg);
  const int n = int_option(opt, "n", 2);
  if (n < 0 || n > 8) throw bad("n must be in 0..8");
  const Complex c = complex_option(opt, "c", 1.0);
  const std::string theta = string_option(opt, "theta", "lattice:sqrt2");
  const SurfaceContext ctx{Surface(cfg.params, cfg.policy)};
  const auto F = parse_supplier(theta, ctx.surface().genus());
  std::mt19937_64 rng(cfg.seed);
  const auto zs = points_option(opt, ctx.surface(), rng, n);
  const auto res = apply_Dn(ctx, c, *F, zs);
  json pts = json::array(), per = json::array();
  for (Complex z : zs) pts.push_back(to_json(z));
  for (Complex v : res.per_graph) per.push_back(to_json(v));
  r["n"] = n;
  r["c"] = to_json(c);
  r["supplier"] = F->name();
  r["points"] = pts;
  r["G_n"] = to_json(res.value);
  r["per_graph"] = per;
  r["graph_count"] = res.per_graph.size();
  if (n >= 2) {
    std::vector<Complex> swapped = zs;
    std::swap(swapped[0], swapped[1]);
    const Complex alt = apply_Dn(ctx, c, *F, swapped).value;
    r.residual("permutation_symmetry", std::abs(alt - res.value) / std::abs(res.value), 1e-7);
  }
  const Complex p0 = n >= 1 ? zs[0] : Complex(0.0, 6.0);
  r["truncation"] = truncation_json(ctx.surface(), p0, -p0);
  return r.finish();
}

CommandResult cmd_recursion_check(const RunConfig& cfg, const json& opt) {
  Report r("recursion-check", &cfg);
  const int n = int_option(opt, "n", 1);
  if (n < 0 || n > 3) throw bad("recursion-check supports 0 <= n <= 3");
  const Complex c = complex_option(opt, "c", 1.0);
  const std::string theta = string_option(opt, "theta", "lattice:sqrt2");
  const ParameterStencil st(Surface(cfg.params, cfg.policy));
  const auto F = parse_supplier(theta, st.genus());
  std::mt19937_64 rng(cfg.seed);
  const auto zs = points_option(opt, st.surface(), rng, n + 1);
  const auto rep = verify_recursion(st, c, F, zs);
  json pts = json::array();
  for (Complex z : zs) pts.push_back(to_json(z));
  r["n"] = n;
  r["c"] = to_json(c);
  r["supplier"] = F->name();
  r["points"] = pts;
  r["lhs"] = to_json(rep.lhs);
  r["rhs"] = to_json(rep.rhs);
  r["noise_floor"] = rep.noise_floor;
  r.residual("recursion", rep.residual, 1e-4);
  r["truncation"] = truncation_json(st.surface(), zs[0], -zs[0]);
  return r.finish();
}

CommandResult cmd_modular_check(const RunConfig& cfg, const json& opt) {
  Report r("modular-check", &cfg);
  const int g = int_option(opt, "g", cfg.params.genus());
  if (g != cfg.params.genus()) throw bad("--g does not match the configured genus");
  const int samples = int_option(opt, "samples", 20);
  const int n = int_option(opt, "n", 1);
  const int word = int_option(opt, "word_length", 6);
  if (samples < 1 || n < 0 || n > 2 || word < 0) throw bad("need samples >= 1, 0 <= n <= 2, word_length >= 0");
  const Complex c = complex_option(opt, "c", 1.0);
  const std::string theta = string_option(opt, "theta", "lattice:sqrt2");

  const SurfaceContext ctx{Surface(cfg.params, cfg.policy)};
  const auto F = parse_supplier(theta, g);
  const CMatrix Omega = ctx.periods().omega();
  std::mt19937_64 rng(cfg.seed);

  const std::vector<std::pair<std::string, double>> tol{{"lemma_N", 1e-10},         {"nc_symmetry", 1e-10},
                                                        {"logdet_derivative", 1e-7}, {"omega_logdet", 1e-7},
                                                        {"s_logdet", 1e-7},          {"automorphy", 1e-4}};
  std::map<std::string, std::vector<double>> values;
  json per = json::array();
  for (int k = 0; k < samples; ++k) {
    const SpElement sp = random_sp(g, word, rng);
    const auto pts = seeded_points(ctx.surface(), rng, std::max(n, 2));
    const ModularFrame f = transform_frame(Omega, sp);
    const auto cons = logdet_consistency(ctx, f, pts[0], pts[1]);
    const std::vector<Complex> zs(pts.begin(), pts.begin() + n);
    const std::map<std::string, double> res{{"lemma_N", lemma_N_residual(f)},
                                            {"nc_symmetry", nc_symmetry_residual(f)},
                                            {"logdet_derivative", logdetM_derivative_check(Omega, sp)},
                                            {"omega_logdet", cons.omega_residual},
                                            {"s_logdet", cons.s_residual},
                                            {"automorphy", verify_automorphy(ctx, sp, c, *F, zs).residual}};
    json pj = json::array();
    for (Complex z : pts) pj.push_back(to_json(z));
    per.push_back({{"element", int_matrix_json(sp.block())}, {"points", pj}, {"residuals", res}});
    for (const auto& [name, v] : res) values[name].push_back(v);
  }
  json summary = json::object();
  for (const auto& [name, t] : tol) {
    const auto& v = values[name];
    const double mx = *std::max_element(v.begin(), v.end());
    summary[name] = {{"max", mx}, {"median", median(v)}};
    r.residual(name, mx, t);
  }
  r["g"] = g;
  r["n"] = n;
  r["c"] = to_json(c);
  r["supplier"] = F->name();
  r["samples"] = per;
  r["summary"] = summary;
  r["truncation"] = truncation_json(ctx.surface(), Complex(0.0, 6.0), Complex(0.0, -6.0));
  return r.finish();
}

using Handler = CommandResult (*)(const RunConfig&, const json&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> h{
      {"validate", cmd_validate},
      {"differentials", cmd_differentials},
      {"period-matrix", cmd_period_matrix},
      {"check-identities", cmd_check_identities},
      {"graphs", cmd_graphs},
      {"virasoro-npoint", cmd_virasoro_npoint},
      {"recursion-check", cmd_recursion_check},
      {"modular-check", cmd_modular_check},
  };
  return h;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput:
    case ErrorKind::Domain: return 2;
    case ErrorKind::NumericalGuard:
    case ErrorKind::NotConverged: return 3;
  }
  return 3;
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid_input";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::NumericalGuard: return "numerical_guard";
    case ErrorKind::NotConverged: return "not_converged";
  }
  return "unknown";
}

CommandResult failure(const std::string& command, int code, const std::string& kind, const std::string& message) {
  json report{{"command", command}, {"pass", false}, {"error", {{"kind", kind}, {"message", message}}}};
  return {code, std::move(report)};
}

}  // namespace

json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

json RunConfig::to_json() const {
  json handles = json::array();
  for (const auto& h : params.handles())
    handles.push_back({{"w", genusg::to_json(h.w)}, {"w_neg", genusg::to_json(h.w_neg)}, {"rho", genusg::to_json(h.rho)}});
  return {{"genus", params.genus()},
          {"handles", handles},
          {"policy",
           {{"max_word_length", policy.max_word_length},
            {"tail_tol", policy.tail_tol},
            {"mode", policy.mode == TruncationMode::Fixed ? "fixed" : "adaptive"}}},
          {"seed", seed}};
}

std::string RunConfig::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : to_json().dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw bad("config must be a JSON object");
  json src = j;
  if (j.contains("params_file")) {
    if (!j["params_file"].is_string()) throw bad("params_file must be a path");
    std::ifstream in(j["params_file"].get<std::string>());
    if (!in) throw bad("cannot open params_file " + j["params_file"].get<std::string>());
    try {
      src = json::parse(in);
    } catch (const json::exception& e) {
      throw bad(std::string("params_file: ") + e.what());
    }
  }
  if (!src.contains("handles") || !src["handles"].is_array() || src["handles"].empty())
    throw bad("config needs a nonempty \"handles\" list");
  std::vector<Handle> hs;
  for (const auto& h : src["handles"]) {
    if (!h.is_object() || !h.contains("w") || !h.contains("w_neg") || !h.contains("rho"))
      throw bad("each handle needs w, w_neg and rho");
    hs.push_back({complex_from_json(h["w"], "w"), complex_from_json(h["w_neg"], "w_neg"),
                  complex_from_json(h["rho"], "rho")});
  }
  if (src.contains("genus") && (!src["genus"].is_number_integer() || src["genus"].get<int>() != static_cast<int>(hs.size())))
    throw bad("genus does not match the number of handles");

  RunConfig cfg;
  cfg.params = SchottkyParams(std::move(hs));
  if (j.contains("policy")) {
    const json& p = j["policy"];
    if (!p.is_object()) throw bad("policy must be an object");
    if (p.contains("max_word_length")) {
      if (!p["max_word_length"].is_number_integer() || p["max_word_length"].get<int>() < 0)
        throw bad("max_word_length must be a nonnegative integer");
      cfg.policy.max_word_length = p["max_word_length"].get<int>();
    }
    if (p.contains("tail_tol")) {
      if (!p["tail_tol"].is_number() || !(p["tail_tol"].get<double>() > 0.0)) throw bad("tail_tol must be positive");
      cfg.policy.tail_tol = p["tail_tol"].get<double>();
    }
    if (p.contains("mode")) {
      const std::string m = p["mode"].is_string() ? p["mode"].get<std::string>() : "";
      if (m == "fixed")
        cfg.policy.mode = TruncationMode::Fixed;
      else if (m == "adaptive")
        cfg.policy.mode = TruncationMode::Adaptive;
      else
        throw bad("policy mode must be \"fixed\" or \"adaptive\"");
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || (!j["seed"].is_number_unsigned() && j["seed"].get<std::int64_t>() < 0))
      throw bad("seed must be a nonnegative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  return cfg;
}

json reference_config() {
  return {{"genus", 2},
          {"handles",
           {{{"w", {-3.0, 0.0}}, {"w_neg", {-1.0, 0.0}}, {"rho", {0.02, 0.0}}},
            {{"w", {1.0, 0.0}}, {"w_neg", {3.0, 0.0}}, {"rho", {0.02, 0.0}}}}},
          {"policy", {{"max_word_length", 8}, {"tail_tol", 1e-10}}},
          {"seed", 0}};
}

Complex parse_complex(const std::string& text) {
  std::string t;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
  auto number = [&](const std::string& part, bool unit_ok) {
    if (unit_ok && (part.empty() || part == "+" || part == "-")) return part == "-" ? -1.0 : 1.0;
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (part.empty() || end != part.c_str() + part.size() || !std::isfinite(v))
      throw bad("cannot parse complex number '" + text + "'");
    return v;
  };
  if (t.empty()) throw bad("empty complex number");
  if (t.back() != 'i' && t.back() != 'j') return {number(t, false), 0.0};
  t.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t k = t.size(); k-- > 1;)
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
      split = k;
      break;
    }
  if (split == std::string::npos) return {0.0, number(t, true)};
  return {number(t.substr(0, split), false), number(t.substr(split), true)};
}

std::vector<Complex> parse_points(const std::string& text) {
  std::vector<Complex> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_complex(item));
  return out;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, h] : handlers()) v.push_back(name);
    return v;
  }();
  return names;
}

CommandResult run_command(const std::string& command, const json& request) {
  const auto& hs = handlers();
  const auto it = std::find_if(hs.begin(), hs.end(), [&](const auto& p) { return p.first == command; });
  if (it == hs.end()) return failure(command, 2, "invalid_input", "unknown command");
  try {
    if (!request.is_object()) throw bad("request must be a JSON object");
    json config = request.value("config", json());
    if (config.is_null()) config = reference_config();
    if (request.contains("seed") && !request["seed"].is_null()) config["seed"] = request["seed"];
    const RunConfig cfg = parse_config(config);
    if (request.contains("threads") && !request["threads"].is_null()) {
      if (!request["threads"].is_number_integer() || request["threads"].get<std::int64_t>() < 0)
        throw bad("threads must be a nonnegative integer");
      set_thread_count(request["threads"].get<unsigned>());
    }
    const json options = request.value("options", json::object());
    if (!options.is_object()) throw bad("options must be an object");
    return it->second(cfg, options);
  } catch (const Error& e) {
    return failure(command, exit_code_for(e.kind()), kind_name(e.kind()), e.what());
  } catch (const json::exception& e) {
    return failure(command, 2, "invalid_input", e.what());
  } catch (const std::exception& e) {
    return failure(command, 3, "internal", e.what());
  }
}

}  // namespace genusg
