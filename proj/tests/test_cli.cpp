#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nhqmc/report.hpp"

namespace fs = std::filesystem;
using namespace nhqmc;

namespace {

struct Outcome {
  int status = 0;
  std::string output;
};

// Runs the CLI through the shell, capturing stdout and stderr together.
Outcome cli(const std::string& args) {
  const std::string command = std::string(NHQMC_CLI_PATH) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buffer{};
  std::size_t n = 0;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) o.output.append(buffer.data(), n);
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nhqmc_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string config(const std::string& name) { return std::string(NHQMC_CONFIG_DIR) + "/" + name; }

std::string write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST_CASE("plan prints the kernel table, sample plan and bounds", "[cli]") {
  const auto o = cli("plan --config " + config("rabi.yaml"));
  INFO(o.output);
  CHECK(o.status == 0);
  CHECK(o.output.find("63.65674") != std::string::npos);
  CHECK(o.output.find("10.15035") != std::string::npos);
  CHECK(o.output.find("n_N           9136") != std::string::npos);
  CHECK(o.output.find("[1, 1]") != std::string::npos);
}

TEST_CASE("run writes the CSV schema and is reproducible", "[cli]") {
  const fs::path a = scratch("run_a");
  const fs::path b = scratch("run_b");
  const auto first = cli("run --config " + config("qite.yaml") + " --output " + a.string());
  INFO(first.output);
  REQUIRE(first.status == 0);
  REQUIRE(cli("run --config " + config("qite.yaml") + " --output " + b.string() + " --workers 2").status == 0);

  const std::string text = read_text((a / "results.csv").string());
  CHECK(text.substr(0, text.find('\n')) == kCsvHeader);
  CHECK(text == read_text((b / "results.csv").string()));
  CHECK_FALSE(fs::exists(a / "results.svg"));

  const auto rows = parse_csv(text);
  REQUIRE(rows.size() == 15);
  for (const auto& r : rows) {
    INFO(r.method << " t = " << r.t);
    CHECK(r.seed == 11);
    REQUIRE(r.exact.has_value());
    CHECK(*r.exact == Catch::Approx(1.0 / std::cosh(2.0 * r.t)).epsilon(1e-8));
    if (r.t == 0.0) CHECK(std::abs(r.estimate - 1.0) < 1e-12);
    if (r.method != "exact") CHECK(std::abs(r.estimate - *r.exact) < 2e-3);
  }

  const auto other = scratch("run_c");
  REQUIRE(cli("run --config " + config("qite.yaml") + " --output " + other.string() + " --seed 12").status == 0);
  CHECK(read_text((other / "results.csv").string()) != text);
}

TEST_CASE("the figure is rendered from the CSV alone", "[cli]") {
  const fs::path dir = scratch("svg");
  REQUIRE(cli("run --config " + config("qite.yaml") + " --output " + dir.string() + " --svg").status == 0);
  const std::string csv = read_text((dir / "results.csv").string());
  const std::string svg = read_text((dir / "results.svg").string());
  CHECK(svg.find("<svg") == 0);
  CHECK(svg == render_svg(csv));
}

TEST_CASE("method override", "[cli]") {
  const fs::path dir = scratch("method");
  const auto o = cli("run --config " + config("qite.yaml") + " --output " + dir.string() + " --method exact:quadrature");
  REQUIRE(o.status == 0);
  const auto rows = parse_csv(read_text((dir / "results.csv").string()));
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) CHECK(r.method == "exact-quadrature");
  CHECK(cli("run --config " + config("qite.yaml") + " --output " + dir.string() + " --method warp").status == 2);
}

TEST_CASE("configuration errors carry a line number", "[cli]") {
  const fs::path dir = scratch("errors");
  const std::string unknown = write_file(dir, "unknown.yaml",
                                         "model:\n  type: nonhermitian\n  qubits: 1\n  terms: [\"1 X\"]\n"
                                         "state: \"0\"\nobservable: {terms: [\"1 Z\"]}\ntimes: {end: 1.0}\n"
                                         "colour: blue\n");
  const auto a = cli("run --config " + unknown);
  CHECK(a.status == 2);
  CHECK(a.output.find("colour") != std::string::npos);
  CHECK(a.output.find("line 8") != std::string::npos);

  const std::string bad = write_file(dir, "bad.yaml",
                                     "model:\n  type: nonhermitian\n  qubits: 1\n  terms: [\"1 Q\"]\n"
                                     "state: \"0\"\nobservable: {terms: [\"1 Z\"]}\ntimes: {end: 1.0}\n");
  const auto b = cli("plan --config " + bad);
  CHECK(b.status == 2);
  CHECK(b.output.find("line 4") != std::string::npos);

  CHECK(cli("run --config " + (dir / "missing.yaml").string()).status == 2);
}
