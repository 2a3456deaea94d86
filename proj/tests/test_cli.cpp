#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(GENUSG_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  while (const std::size_t n = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path temp_dir() {
  static const fs::path d = [] {
    const fs::path p = fs::temp_directory_path() / "genusg_cli_test";
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string write_file(const std::string& name, const std::string& text) {
  const fs::path p = temp_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

const std::string fixture = std::string(GENUSG_SOURCE_DIR) + "/fixtures/g2_reference.json";

}  // namespace

TEST_CASE("graphs --n 2") {
  const auto r = cli("graphs --n 2");
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["count"] == 7);
  CHECK(j["graphs"].size() == 7);
}

TEST_CASE("validate on the shipped fixture") {
  const auto r = cli("--config " + fixture + " validate");
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["validation"]["pass"] == true);
}

TEST_CASE("exit codes") {
  CHECK(cli("--config " + write_file("broken.json", "{\"genus\": 2,") + " validate").code == 2);
  CHECK(cli("--config " + write_file("nohandles.json", "{\"genus\": 2}") + " validate").code == 2);
  CHECK(cli("--config /nonexistent/config.json validate").code == 2);
  CHECK(cli("graphs").code == 2);
  const std::string overlap =
      write_file("overlap.json", R"({"genus": 1, "handles": [{"w": [0, 0], "w_neg": [0.1, 0], "rho": [0.02, 0]}]})");
  CHECK(cli("--config " + overlap + " validate").code == 1);
  CHECK(cli("--config " + overlap + " differentials").code == 2);
  const auto pole = cli("differentials --at \"0.5+4i,0.5+4i\"");
  CHECK(pole.code == 3);
  CHECK(json::parse(pole.out)["error"]["kind"] == "numerical_guard");
}

TEST_CASE("reports are reproducible and flags win over the config") {
  const auto a = cli("--config " + fixture + " --seed 9 differentials");
  const auto b = cli("--config " + fixture + " --seed 9 differentials");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const json j = json::parse(a.out);
  CHECK(j["config"]["seed"] == 9);
  CHECK(j["config_hash"].get<std::string>().size() == 16);
  CHECK(cli("--config " + fixture + " --seed 10 differentials").out != a.out);

  const std::string out = (temp_dir() / "report.json").string();
  CHECK(cli("--config " + fixture + " --seed 9 --threads 1 --output " + out + " differentials").code == 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == a.out);
}

TEST_CASE("differentials and virasoro-npoint schemas") {
  const json d = json::parse(cli("differentials --at \"0.1+0.2i, 2.5-0.1i\"").out);
  for (const char* key : {"omega", "s", "nu", "tau", "truncation", "residuals", "config_hash"}) CHECK(d.contains(key));
  CHECK(d["omega"].size() == 2);
  CHECK(d["tau"].size() == 2);

  const auto v = cli("virasoro-npoint --n 2 --c 1 --points \"0.1+0.2i, 2.5-0.1i\" --theta lattice:sqrt2");
  CHECK(v.code == 0);
  const json j = json::parse(v.out);
  CHECK(j["graph_count"] == 7);
  CHECK(j["per_graph"].size() == 7);
  CHECK(j["G_n"].size() == 2);
  for (const auto& [name, value] : j["residuals"].items()) CHECK(value.get<double>() >= 0.0);
}

TEST_CASE("recursion-check and modular-check") {
  const auto r = cli("recursion-check --n 1 --c 1 --theta lattice:sqrt2");
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["residuals"]["recursion"].get<double>() < 1e-4);

  const auto m = cli("modular-check --g 2 --samples 4 --n 1 --c 1");
  CHECK(m.code == 0);
  const json j = json::parse(m.out);
  CHECK(j["samples"].size() == 4);
  CHECK(j["summary"].contains("automorphy"));
  CHECK(cli("modular-check --g 3 --samples 2").code == 2);
}
