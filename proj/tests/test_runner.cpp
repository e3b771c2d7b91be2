#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "hadamard/errors.hpp"
#include "hadamard/runner.hpp"

using namespace hadamard;
namespace fs = std::filesystem;

namespace {

const fs::path kExampleConfig = fs::path(HADAMARD_SOURCE_DIR) / "configs" / "hadamard_example.json";

std::string config_text(const std::string& override_key = "", const std::string& override_value = "") {
  std::ostringstream os;
  os << "{";
  const std::vector<std::pair<std::string, std::string>> fields = {
      {"a", "1"},
      {"b", "2"},
      {"alpha", "0.5"},
      {"N", "3"},
      {"k", "50"},
      {"x_a", "0"},
      {"x_b", "0.6931471805599453"},
      {"lagrangian", "\"(Dx - sqrt(ln(t))/gamma(1.5))^2\""},
      {"exact_solution", "\"ln(t)\""},
  };
  bool first = true;
  bool replaced = false;
  for (const auto& [key, value] : fields) {
    std::string v = value;
    if (key == override_key) {
      replaced = true;
      if (override_value.empty()) continue;  // drop the key
      v = override_value;
    }
    os << (first ? "" : ",") << '"' << key << "\":" << v;
    first = false;
  }
  if (!override_key.empty() && !replaced) os << ",\"" << override_key << "\":" << override_value;
  os << "}";
  return os.str();
}

std::string config_error_key(const std::string& text, bool full_validation = true) {
  try {
    const RunConfig c = parse_config(text);
    if (full_validation) validate(c);
  } catch (const ConfigError& e) {
    return e.key();
  }
  FAIL("expected ConfigError for " << text);
  return {};
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "hadamard_runner_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("the shipped example config loads") {
  const RunConfig c = load_config(kExampleConfig);
  CHECK(c.a == 1.0);
  CHECK(c.b == 2.0);
  CHECK(c.alpha == 0.5);
  CHECK(c.N == 3);
  CHECK(c.x_a == 0.0);
  CHECK(c.x_b == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(c.lagrangian == "(Dx - sqrt(ln(t))/gamma(1.5))^2");
  REQUIRE(c.exact_solution.has_value());
  CHECK(*c.exact_solution == "ln(t)");
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("config errors name the offending key") {
  CHECK(config_error_key(config_text("alpha", "1.5")) == "alpha");
  CHECK(config_error_key(config_text("k", "2")) == "k");
  CHECK(config_error_key(config_text("N", "1")) == "N");
  CHECK(config_error_key(config_text("b", "0.5")) == "b");
  CHECK(config_error_key(config_text("apha", "0.5")) == "apha");
  CHECK(config_error_key(config_text("alpha", "")) == "alpha");
  CHECK(config_error_key(config_text("k", "\"fifty\"")) == "k");
  CHECK(config_error_key(config_text("k", "50.5")) == "k");
  CHECK(config_error_key(config_text("lagrangian", "3")) == "lagrangian");
  CHECK(config_error_key(config_text("lagrangian", "\"(Dx\"")) == "lagrangian");
  CHECK(config_error_key(config_text("exact_solution", "\"Dx\"")) == "exact_solution");
  CHECK(config_error_key(config_text("exact_solution", "\"t\"")) == "exact_solution");
  CHECK(config_error_key(config_text("grad_tol", "0")) == "grad_tol");
  CHECK(config_error_key(config_text("max_iterations", "-1")) == "max_iterations");
  CHECK(config_error_key("[1, 2]") == "<document>");
  CHECK(config_error_key("{") == "<document>");
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("optional keys") {
  const RunConfig c = parse_config(config_text("grad_tol", "1e-9"));
  CHECK(c.solver.grad_tol == 1e-9);
  CHECK(c.solver.max_iterations == 5000);
  CHECK(c.output_path.empty());
  const RunConfig no_exact = parse_config(config_text("exact_solution", ""));
  CHECK_FALSE(no_exact.exact_solution.has_value());
}

TEST_CASE("example solve tracks the exact solution") {
  RunConfig c = load_config(kExampleConfig);
  c.output_path.clear();
  c.k = 50;
  const SolveReport small = run_solve(c);
  c.k = 100;
  const SolveReport large = run_solve(c);
  for (const auto* r : {&small, &large}) {
    CHECK(r->converged);
    REQUIRE(r->E_k.has_value());
    CHECK(*r->E_k <= 0.06);
    REQUIRE(r->bound_diagnostic.has_value());
    CHECK(*r->bound_diagnostic >= 0.0);
    double worst = 0.0;
    for (const auto& row : r->rows) worst = std::max(worst, *row.abs_err);
    CHECK(*r->E_k == worst);
    for (std::size_t i = 1; i < r->history.size(); ++i) CHECK(r->history[i] <= r->history[i - 1]);
  }
  CHECK(*large.E_k < *small.E_k);
  CHECK(large.rows.size() == 100);
  CHECK(large.rows.front().x_numeric == 0.0);
  CHECK(large.rows.back().x_numeric == c.x_b);
}

TEST_CASE("a Dx-free Lagrangian minimized at the linear guess") {
  RunConfig c = parse_config(
      R"json({"a":1,"b":2,"alpha":0.5,"N":3,"k":50,"x_a":0,"x_b":1,)json"
      R"json("lagrangian":"(x - (t - 1))^2","exact_solution":"t - 1"})json");
  const SolveReport r = run_solve(c);
  CHECK(r.converged);
  REQUIRE(r.E_k.has_value());
  CHECK(*r.E_k <= 1e-6);
  CHECK(r.J_approx <= 1e-12);
}

TEST_CASE("report CSV round-trips") {
  const fs::path path = scratch_dir() / "report.csv";
  RunConfig c = load_config(kExampleConfig);
  c.k = 40;
  c.output_path = path.string();
  const SolveReport r = run_solve(c);
  const auto rows = read_report_csv(path);
  REQUIRE(rows.size() == r.rows.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].t == r.rows[i].t);
    CHECK(rows[i].x_numeric == r.rows[i].x_numeric);
    CHECK(*rows[i].x_exact == *r.rows[i].x_exact);
    worst = std::max(worst, *rows[i].abs_err);
  }
  CHECK(worst == *r.E_k);

  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,x_numeric,x_exact,abs_err");
  const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(body.find('\r') == std::string::npos);
  CHECK(body.back() == '\n');

  // Without an exact solution the last two columns are empty.
  const fs::path bare = scratch_dir() / "bare.csv";
  RunConfig no_exact = parse_config(config_text("exact_solution", ""));
  no_exact.k = 10;
  no_exact.output_path = bare.string();
  const SolveReport nr = run_solve(no_exact);
  CHECK_FALSE(nr.E_k.has_value());
  for (const auto& row : read_report_csv(bare)) {
    CHECK_FALSE(row.x_exact.has_value());
    CHECK_FALSE(row.abs_err.has_value());
  }
}

TEST_CASE("evaluation errors surface from run_solve") {
  const RunConfig c = parse_config(
      R"json({"a":1,"b":2,"alpha":0.5,"N":3,"k":10,"x_a":-1,"x_b":-1,"lagrangian":"ln(x)"})json");
  CHECK_THROWS_AS(run_solve(c), EvalError);
}

TEST_CASE("convergence study") {
  const RunConfig c = parse_config(config_text());
  const auto rows = convergence_study(c, {30, 60}, {2, 3});
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].k == 30);
  CHECK(rows[0].N == 2);
  CHECK(rows[1].k == 30);
  CHECK(rows[1].N == 3);
  CHECK(rows[2].k == 60);
  CHECK(rows[3].N == 3);
  for (const auto& r : rows) CHECK(r.converged);
  CHECK(rows[3].E_k < rows[1].E_k);

  const auto single = convergence_study(c, {20}, {3});
  CHECK(single.size() == 1);

  CHECK_THROWS_AS(convergence_study(c, {}, {3}), ConfigError);
  CHECK_THROWS_AS(convergence_study(c, {20}, {}), ConfigError);
  CHECK_THROWS_AS(convergence_study(c, {2}, {3}), ConfigError);
  CHECK_THROWS_AS(convergence_study(parse_config(config_text("exact_solution", "")), {20}, {3}), ConfigError);

  const fs::path path = scratch_dir() / "study.csv";
  write_study_csv(rows, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,N,E_k,J_approx,iterations,converged");
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    CHECK(line.back() == '1');
  }
  CHECK(lines == 4);
}

TEST_CASE("a failing cell is recorded, not thrown") {
  // The Lagrangian cannot be evaluated at any node.
  const RunConfig c = parse_config(
      R"json({"a":1,"b":2,"alpha":0.5,"N":3,"k":10,"x_a":0,"x_b":0.6931471805599453,)json"
      R"json("lagrangian":"Dx^2 + ln(0 - t)","exact_solution":"ln(t)"})json");
  const auto rows = convergence_study(c, {10, 12}, {3});
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK_FALSE(r.converged);
    CHECK(std::isnan(r.E_k));
  }
}
