#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "hadamard/errors.hpp"
#include "hadamard/special_functions.hpp"
#include "hadamard/transcription.hpp"
#include "oracles.hpp"

using namespace hadamard;

namespace {

const char* kExampleLagrangian = "(Dx - sqrt(ln(t))/gamma(1.5))^2";

ProblemSpec problem(const std::string& lagrangian, double x_a = 0.0, double x_b = std::log(2.0),
                    int N = 3, double alpha = 0.5) {
  return ProblemSpec{1.0, 2.0, FractionalOrder(alpha), N, x_a, x_b,
                     dsl::parse(lagrangian, dsl::kLagrangianVariables), std::nullopt};
}

Transcription transcription(const ProblemSpec& spec, int k, MomentRule rule = MomentRule::ProductLog) {
  return Transcription(spec, make_grid(spec.a, spec.b, k),
                       expansion_coefficients(spec.alpha, spec.N), rule);
}

std::vector<double> interior_of(const Grid& g, double (*f)(double)) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < g.size(); ++i) out.push_back(f(g[i]));
  return out;
}

double ln(double t) { return std::log(t); }

double max_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("make_grid") {
  const Grid three = make_grid(1.0, 2.0, 3);
  REQUIRE(three.size() == 3);
  CHECK(three[0] == 1.0);
  CHECK(three[1] == 1.5);
  CHECK(three[2] == 2.0);

  const Grid fine = make_grid(1.0, 2.0, 101);
  CHECK(fine.h == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(fine[50] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(fine.nodes.back() == 2.0);
  for (std::size_t i = 1; i < fine.size(); ++i) CHECK(fine[i] > fine[i - 1]);

  const Grid odd = make_grid(0.3, 1.7, 7);
  CHECK(odd.nodes.front() == 0.3);
  CHECK(odd.nodes.back() == 1.7);

  CHECK_THROWS_AS(make_grid(2.0, 1.0, 10), ArgumentError);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 10), ArgumentError);
  CHECK_THROWS_AS(make_grid(1.0, 2.0, 2), ArgumentError);
}

TEST_CASE("derivative_samples is exact for polynomials up to degree two") {
  const Grid g = make_grid(1.0, 2.0, 11);
  std::vector<double> lin(g.size()), quad(g.size()), constant(g.size(), 4.2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    lin[i] = g[i];
    quad[i] = g[i] * g[i];
  }
  const auto u_lin = derivative_samples(lin, g);
  const auto u_quad = derivative_samples(quad, g);
  const auto u_const = derivative_samples(constant, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CAPTURE(i);
    CHECK(u_lin[i] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u_quad[i] == doctest::Approx(2.0 * g[i]).epsilon(1e-12));
    CHECK(u_const[i] == 0.0);
  }
  CHECK_THROWS_AS(derivative_samples(std::vector<double>(5), g), ArgumentError);
}

TEST_CASE("assemble on ln t reproduces the exact fractional derivative") {
  const ProblemSpec spec = problem(kExampleLagrangian);
  const Transcription tr = transcription(spec, 101);
  const auto traj = tr.assemble(interior_of(tr.grid(), ln));
  const double scale = 1.0 / hadamard::gamma(1.5);
  double worst = 0.0;
  for (std::size_t i = 1; i < traj.grid.size(); ++i) {
    worst = std::max(worst, std::abs(traj.d[i] - scale * std::sqrt(std::log(traj.grid[i]))));
  }
  CHECK(worst <= 1e-4);
  CHECK(traj.d[0] == 0.0);
  CHECK(traj.x.front() == spec.x_a);
  CHECK(traj.x.back() == spec.x_b);
  REQUIRE(traj.moments.size() == 2);
  for (const auto& m : traj.moments) CHECK(m.values[0] == 0.0);
}

TEST_CASE("assemble of the zero trajectory is identically zero") {
  const ProblemSpec spec = problem(kExampleLagrangian, 0.0, 0.0, 5);
  const Transcription tr = transcription(spec, 21);
  const auto traj = tr.assemble(std::vector<double>(tr.dimension(), 0.0));
  for (std::size_t i = 0; i < traj.grid.size(); ++i) {
    CHECK(traj.x[i] == 0.0);
    CHECK(traj.u[i] == 0.0);
    CHECK(traj.d[i] == 0.0);
    for (const auto& m : traj.moments) CHECK(m.values[i] == 0.0);
  }
}

TEST_CASE("minimal grid has one unknown") {
  const ProblemSpec spec = problem(kExampleLagrangian);
  const Transcription tr = transcription(spec, 3);
  CHECK(tr.dimension() == 1);
  const auto traj = tr.assemble(std::vector<double>{0.4});
  CHECK(traj.x == std::vector<double>{0.0, 0.4, std::log(2.0)});
  CHECK(std::isfinite(tr.objective(std::vector<double>{0.4})));
  CHECK_THROWS_AS(tr.assemble(std::vector<double>{0.1, 0.2}), ArgumentError);
}

TEST_CASE("construction rejects mismatched coefficients and grids") {
  const ProblemSpec spec = problem(kExampleLagrangian);
  const Grid g = make_grid(1.0, 2.0, 11);
  CHECK_THROWS_AS(Transcription(spec, g, expansion_coefficients(FractionalOrder(0.5), 4)), ArgumentError);
  CHECK_THROWS_AS(Transcription(spec, g, expansion_coefficients(FractionalOrder(0.3), 3)), ArgumentError);
  CHECK_THROWS_AS(Transcription(spec, make_grid(1.0, 3.0, 11), expansion_coefficients(FractionalOrder(0.5), 3)),
                  ArgumentError);
}

TEST_CASE("objective weights zero the first node") {
  const ProblemSpec spec = problem("1");
  for (int k : {3, 11, 100}) {
    const Transcription tr = transcription(spec, k);
    const double h = tr.grid().h;
    CHECK(tr.objective(std::vector<double>(tr.dimension(), 0.3)) == doctest::Approx(1.0 - h / 2).epsilon(1e-14));
  }
  const ProblemSpec zero = problem("Dx^2", 0.0, 0.0);
  const Transcription tr = transcription(zero, 30);
  CHECK(tr.objective(std::vector<double>(tr.dimension(), 0.0)) == 0.0);
}

TEST_CASE("objective of the example at the exact solution is small") {
  const ProblemSpec spec = problem(kExampleLagrangian);
  const Transcription tr = transcription(spec, 250);
  const double J = tr.objective(interior_of(tr.grid(), ln));
  CHECK(J >= 0.0);
  CHECK(J <= 1e-3);
  // The free functions delegate to the same computation.
  const auto interior = interior_of(tr.grid(), ln);
  CHECK(objective(interior, spec, tr.grid(), tr.coefficients()) == J);
}

TEST_CASE("objective quadrature converges at second order") {
  // L = (Dx)^2 with x = ln t: D x = sqrt(ln t)/Gamma(1.5), so
  // J = int_1^2 ln t dt / Gamma(1.5)^2 = (2 ln 2 - 1) / Gamma(1.5)^2.
  const ProblemSpec spec = problem("Dx^2");
  const double g15 = hadamard::gamma(1.5);
  const double limit = (2.0 * std::log(2.0) - 1.0) / (g15 * g15);
  const Transcription coarse = transcription(spec, 100);
  const Transcription fine = transcription(spec, 400);
  const double e_coarse = std::abs(coarse.objective(interior_of(coarse.grid(), ln)) - limit);
  const double e_fine = std::abs(fine.objective(interior_of(fine.grid(), ln)) - limit);
  const double order = std::log(e_coarse / e_fine) / std::log(coarse.grid().h / fine.grid().h);
  CAPTURE(e_coarse);
  CAPTURE(e_fine);
  CHECK(order >= 1.8);
}

TEST_CASE("moments satisfy the discrete dynamics of the active rule") {
  const ProblemSpec spec = problem(kExampleLagrangian, 0.0, std::log(2.0), 6);
  oracle::Rng rng(21);
  std::vector<double> interior(38);
  for (auto& v : interior) v = rng.uniform(-1.0, 1.0);

  SUBCASE("product rule in ln t") {
    const Transcription tr = transcription(spec, 40);
    const auto traj = tr.assemble(interior);
    for (int p = 2; p <= 6; ++p) {
      const auto w = moment_weights(tr.grid(), p);
      const auto& v = traj.moments[static_cast<std::size_t>(p - 2)].values;
      CHECK(v[0] == 0.0);
      for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        CHECK(v[i + 1] - v[i] == doctest::Approx(w.lo[i] * traj.x[i] + w.hi[i] * traj.x[i + 1]).epsilon(1e-12));
      }
    }
  }
  SUBCASE("trapezoid in t") {
    const Transcription tr = transcription(spec, 40, MomentRule::Trapezoid);
    const auto traj = tr.assemble(interior);
    const Grid& g = tr.grid();
    for (int p = 2; p <= 6; ++p) {
      const auto& v = traj.moments[static_cast<std::size_t>(p - 2)].values;
      const auto f = [&](std::size_t i) {
        return (p - 1) * std::pow(std::log(g[i] / g.a), p - 2) * traj.x[i] / g[i];
      };
      for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        CHECK(v[i + 1] - v[i] == doctest::Approx(g.h / 2 * (f(i) + f(i + 1))).epsilon(1e-12).scale(1e-12));
      }
    }
  }
}

TEST_CASE("gradient of a decoupled Lagrangian") {
  const ProblemSpec spec = problem("x^2", 0.5, -0.25);
  const Transcription tr = transcription(spec, 25);
  oracle::Rng rng(4);
  std::vector<double> interior(tr.dimension());
  for (auto& v : interior) v = rng.uniform(-2.0, 2.0);
  const auto g = tr.gradient(interior);
  const auto& w = tr.quadrature_weights();
  for (std::size_t j = 0; j < g.size(); ++j) {
    CAPTURE(j);
    CHECK(g[j] == doctest::Approx(2.0 * w[j + 1] * interior[j]).epsilon(1e-7));
  }
}

TEST_CASE("gradient agrees with an independent difference oracle") {
  const ProblemSpec spec = problem(kExampleLagrangian);
  const Transcription tr = transcription(spec, 50);
  const auto f = [&](std::span<const double> z) { return tr.objective(z); };
  oracle::Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> interior = interior_of(tr.grid(), ln);
    for (auto& v : interior) v += rng.uniform(-0.2, 0.2);
    const auto g = tr.gradient(interior);
    const auto reference = oracle::central_gradient(f, interior, 1e-5);
    const double scale = max_norm(reference);
    for (std::size_t j = 0; j < g.size(); ++j) {
      CAPTURE(j);
      CHECK(std::abs(g[j] - reference[j]) <= 1e-5 * std::max(std::abs(reference[j]), scale));
    }
  }
}

TEST_CASE("parallel incremental gradient matches the serial reference") {
  for (int N : {2, 3, 7}) {
    const ProblemSpec spec = problem("(Dx - sqrt(ln(t)))^2 + x^2*t - 0.1*abs(Dx)", 0.0, std::log(2.0), N, 0.7);
    const Transcription tr = transcription(spec, 60);
    oracle::Rng rng(static_cast<std::uint64_t>(N));
    std::vector<double> interior(tr.dimension());
    for (auto& v : interior) v = rng.uniform(-1.0, 1.0);
    const auto fast = tr.gradient(interior);
    const auto slow = tr.gradient_serial(interior);
    const double scale = max_norm(slow);
    for (std::size_t j = 0; j < fast.size(); ++j) {
      CAPTURE(j);
      CHECK(std::abs(fast[j] - slow[j]) <= 1e-7 * scale);
    }
    CHECK(objective_gradient(interior, spec, tr.grid(), tr.coefficients()) == fast);
  }
}

TEST_CASE("evaluation errors carry the node index") {
  const ProblemSpec spec = problem("ln(x)", 1.0, 1.0);
  const Transcription tr = transcription(spec, 12);
  std::vector<double> interior(tr.dimension(), 1.0);
  interior[3] = -1.0;
  try {
    tr.objective(interior);
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    REQUIRE(e.node().has_value());
    CHECK(*e.node() == 4);
  }
  CHECK_THROWS_AS(tr.gradient(interior), EvalError);
  CHECK_THROWS_AS(tr.gradient_serial(interior), EvalError);
}
