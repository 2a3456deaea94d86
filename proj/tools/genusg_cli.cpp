#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "genusg/genusg.h"

using nlohmann::json;

namespace {

struct Options {
  std::string config_path;
  std::string output_path;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  json options = json::object();
};

int emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return 0;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "cannot write " << path << '\n';
    return 2;
  }
  out << text << '\n';
  return 0;
}

int malformed(const std::string& command, const std::string& message, const std::string& path) {
  const json report{{"command", command}, {"pass", false}, {"error", {{"kind", "invalid_input"}, {"message", message}}}};
  emit(report.dump(2), path);
  std::cerr << message << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schottky surfaces, Virasoro graph operators and their identity checks"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "JSON run configuration (defaults to the g=2 reference surface)");
  app.add_option("--output", o.output_path, "write the JSON report here instead of stdout");
  app.add_option("--threads", o.threads, "worker threads (0 = all cores)");
  app.add_option("--seed", o.seed, "seed for randomised points and elements (overrides the config)");

  std::string at, points, theta = "lattice:sqrt2", c = "1";
  int n = 2, g = 2, samples = 20, word_length = 6;

  auto* validate = app.add_subcommand("validate", "check the disc-separation condition");
  auto* diff = app.add_subcommand("differentials", "omega, s, nu and tau at a point pair");
  diff->add_option("--at", at, "x,y");
  auto* pm = app.add_subcommand("period-matrix", "period matrix with quadrature diagnostics");
  auto* ids = app.add_subcommand("check-identities", "Rauch and the variational identities");
  ids->add_option("--points", points, "x,y1,y2");
  auto* graphs = app.add_subcommand("graphs", "Virasoro graph census and decompositions");
  graphs->add_option("--n", n, "order")->required();
  auto* vnp = app.add_subcommand("virasoro-npoint", "D_n applied to a moduli function");
  vnp->add_option("--n", n, "number of points");
  vnp->add_option("--c", c, "central charge");
  vnp->add_option("--points", points, "comma-separated complex points");
  vnp->add_option("--theta", theta, "lattice:sqrt2 | lattice:e8 | lattice:file=<json> | poly:<json>");
  auto* rec = app.add_subcommand("recursion-check", "D_{n+1} against the recursive formula");
  rec->add_option("--n", n, "order of the inner operator");
  rec->add_option("--c", c, "central charge");
  rec->add_option("--points", points, "n + 1 comma-separated complex points");
  rec->add_option("--theta", theta, "moduli function supplier");
  auto* mod = app.add_subcommand("modular-check", "Sp(2g, Z) identities and automorphy");
  mod->add_option("--g", g, "genus");
  mod->add_option("--samples", samples, "number of seeded elements");
  mod->add_option("--n", n, "points in the automorphy check (<= 2)");
  mod->add_option("--c", c, "central charge");
  mod->add_option("--theta", theta, "moduli function supplier");
  mod->add_option("--word-length", word_length, "generators per sampled element");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  if (sub == diff && !at.empty()) o.options["at"] = at;
  if ((sub == ids || sub == vnp || sub == rec) && !points.empty()) o.options["points"] = points;
  if (sub == graphs) o.options["n"] = n;
  if (sub == vnp || sub == rec || sub == mod) {
    o.options["theta"] = theta;
    o.options["c"] = c;
    if (sub->count("--n")) o.options["n"] = n;
  }
  if (sub == mod) {
    o.options["g"] = g;
    o.options["samples"] = samples;
    o.options["word_length"] = word_length;
  }
  (void)validate;
  (void)pm;

  json request{{"options", o.options}};
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) return malformed(command, "cannot open config " + o.config_path, o.output_path);
    try {
      request["config"] = json::parse(in);
    } catch (const json::exception& e) {
      return malformed(command, std::string("config is not valid JSON: ") + e.what(), o.output_path);
    }
  }
  if (o.seed) request["seed"] = *o.seed;
  if (o.threads) request["threads"] = *o.threads;

  char* report = nullptr;
  int exit_code = 0;
  if (genusg_run(command.c_str(), request.dump().c_str(), &report, &exit_code) != GENUSG_OK) {
    std::cerr << genusg_last_error() << '\n';
    return 3;
  }
  const std::string text(report);
  genusg_string_free(report);
  if (const int e = emit(text, o.output_path)) return e;
  if (exit_code != 0) {
    const json r = json::parse(text);
    if (r.contains("error")) std::cerr << r["error"]["message"].get<std::string>() << '\n';
  }
  return exit_code;
}
