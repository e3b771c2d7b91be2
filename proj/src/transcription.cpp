#include "hadamard/transcription.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include "hadamard/errors.hpp"

namespace hadamard {

FractionalOrder::FractionalOrder(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream msg;
    msg << "fractional order alpha must lie in (0, 1), got " << alpha;
    throw ArgumentError(msg.str());
  }
}

Grid make_grid(double a, double b, int k) {
  if (!(a > 0.0)) throw ArgumentError("grid: left endpoint a must be > 0");
  if (!(b > a)) throw ArgumentError("grid: right endpoint b must exceed a");
  if (k < 3) throw ArgumentError("grid: need k >= 3 nodes, got " + std::to_string(k));
  Grid g{a, b, (b - a) / (k - 1), std::vector<double>(static_cast<std::size_t>(k))};
  for (int i = 0; i < k; ++i) g.nodes[static_cast<std::size_t>(i)] = a + i * g.h;
  g.nodes.back() = b;
  return g;
}

void ProblemSpec::validate() const {
  if (!(a > 0.0)) throw ArgumentError("problem: a must be > 0");
  if (!(b > a)) throw ArgumentError("problem: b must exceed a");
  if (N < 2) throw ArgumentError("problem: expansion order N must be >= 2");
  if (!std::isfinite(x_a) || !std::isfinite(x_b)) throw ArgumentError("problem: boundary values must be finite");
  if (lagrangian.empty()) throw ArgumentError("problem: missing Lagrangian");
  if (exact_solution) {
    const auto vars = exact_solution->variables();
    if (vars.contains(dsl::Variable::X) || vars.contains(dsl::Variable::Dx)) {
      throw ArgumentError("problem: exact solution may only reference t");
    }
    const double at_a = dsl::evaluate(*exact_solution, {a, 0.0, 0.0});
    const double at_b = dsl::evaluate(*exact_solution, {b, 0.0, 0.0});
    if (!(std::abs(at_a - x_a) <= 1e-9) || !(std::abs(at_b - x_b) <= 1e-9)) {
      throw ArgumentError("problem: exact solution does not meet the boundary values");
    }
  }
}

std::vector<double> derivative_samples(std::span<const double> x, const Grid& grid) {
  const std::size_t k = grid.size();
  if (x.size() != k) throw ArgumentError("derivative_samples: length mismatch");
  const double h = grid.h;
  std::vector<double> u(k);
  u[0] = (4.0 * (x[1] - x[0]) - (x[2] - x[0])) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < k; ++i) u[i] = (x[i + 1] - x[i - 1]) / (2.0 * h);
  u[k - 1] = ((x[k - 3] - x[k - 1]) - 4.0 * (x[k - 2] - x[k - 1])) / (2.0 * h);
  return u;
}

Transcription::Transcription(const ProblemSpec& spec, Grid grid, ExpansionCoefficients coeffs,
                             MomentRule rule)
    : spec_(spec), grid_(std::move(grid)), coeffs_(std::move(coeffs)) {
  if (coeffs_.order != spec_.N || coeffs_.alpha.value() != spec_.alpha.value()) {
    throw ArgumentError("transcription: coefficients do not match the problem's (alpha, N)");
  }
  if (grid_.a != spec_.a || grid_.b != spec_.b) {
    throw ArgumentError("transcription: grid does not span the problem interval");
  }
  const std::size_t k = grid_.size();
  const int N = coeffs_.order;
  const auto orders = static_cast<std::size_t>(N - 1);

  for (int p = 2; p <= N; ++p) moment_weights_.push_back(moment_weights(grid_, p, rule));
  node_lagrangian_.reserve(k);
  for (std::size_t i = 0; i < k; ++i) node_lagrangian_.emplace_back(spec_.lagrangian, grid_[i]);

  weights_.assign(k, grid_.h);
  weights_[0] = 0.0;
  weights_[k - 1] = 0.5 * grid_.h;

  const double al = coeffs_.alpha.value();
  x_factor_.assign(k, 0.0);
  u_factor_.assign(k, 0.0);
  v_factor_.assign(k * orders, 0.0);
  for (std::size_t i = 1; i < k; ++i) {
    const double t = grid_[i];
    const double L = std::log1p((t - grid_.a) / grid_.a);
    x_factor_[i] = coeffs_.A * std::pow(L, -al);
    u_factor_[i] = coeffs_.B * std::pow(L, 1.0 - al) * t;
    for (int p = 2; p <= N; ++p) {
      v_factor_[i * orders + static_cast<std::size_t>(p - 2)] = coeffs_.c(p) * std::pow(L, 1.0 - al - p);
    }
  }
}

std::vector<double> Transcription::full_trajectory(std::span<const double> interior) const {
  if (interior.size() != dimension()) {
    throw ArgumentError("transcription: expected " + std::to_string(dimension()) +
                        " interior values, got " + std::to_string(interior.size()));
  }
  std::vector<double> x(grid_.size());
  x.front() = spec_.x_a;
  x.back() = spec_.x_b;
  std::copy(interior.begin(), interior.end(), x.begin() + 1);
  return x;
}

DiscreteTrajectory Transcription::assemble(std::span<const double> interior) const {
  DiscreteTrajectory traj{grid_, full_trajectory(interior), {}, {}, {}};
  traj.u = derivative_samples(traj.x, grid_);
  for (const auto& w : moment_weights_) traj.moments.push_back(moment_values(traj.x, w));
  traj.d = approximate_derivative(traj.x, traj.u, traj.moments, coeffs_, grid_);
  return traj;
}

double Transcription::objective_full(std::span<const double> x, Scratch& scratch) const {
  const std::size_t k = grid_.size();
  const std::size_t orders = moment_weights_.size();
  const double two_h = 2.0 * grid_.h;
  auto& v = scratch.moments;
  v.assign(orders, 0.0);

  double total = 0.0;
  for (std::size_t i = 1; i < k; ++i) {
    double u;
    if (i + 1 < k) {
      u = (x[i + 1] - x[i - 1]) / two_h;
    } else {
      u = ((x[k - 3] - x[k - 1]) - 4.0 * (x[k - 2] - x[k - 1])) / two_h;
    }
    double d = x_factor_[i] * x[i] + u_factor_[i] * u;
    const double* vf = &v_factor_[i * orders];
    for (std::size_t q = 0; q < orders; ++q) {
      const auto& w = moment_weights_[q];
      v[q] = v[q] + w.lo[i - 1] * x[i - 1] + w.hi[i - 1] * x[i];
      d += vf[q] * v[q];
    }
    total += weights_[i] * lagrangian_at(i, x[i], d);
  }
  return total;
}

double Transcription::lagrangian_at(std::size_t i, double x, double d) const {
  try {
    return node_lagrangian_[i](grid_[i], x, d);
  } catch (const EvalError& e) {
    throw EvalError(e.message(), e.position(), i);
  }
}

double Transcription::objective(std::span<const double> interior) const {
  Scratch scratch;
  scratch.x = full_trajectory(interior);
  return objective_full(scratch.x, scratch);
}

double Transcription::partial_full(std::span<const double> interior, std::size_t j,
                              Scratch& scratch) const {
  const double xj = interior[j];
  const double step = 1e-6 * (1.0 + std::abs(xj));
  const double up = xj + step;
  const double down = xj - step;
  scratch.x[j + 1] = up;
  const double f_up = objective_full(scratch.x, scratch);
  scratch.x[j + 1] = down;
  const double f_down = objective_full(scratch.x, scratch);
  scratch.x[j + 1] = xj;
  return (f_up - f_down) / (up - down);
}

std::vector<double> Transcription::gradient_serial(std::span<const double> interior) const {
  Scratch scratch;
  scratch.x = full_trajectory(interior);
  std::vector<double> g(dimension());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = partial_full(interior, j, scratch);
  return g;
}

double Transcription::partial_incremental(const Linearization& base, std::size_t j) const {
  const std::size_t k = grid_.size();
  const std::size_t m = j + 1;  // perturbed node
  const std::size_t orders = moment_weights_.size();
  const double inv_2h = 1.0 / (2.0 * grid_.h);

  const double xm = base.x[m];
  const double step = 1e-6 * (1.0 + std::abs(xm));
  const double up = xm + step;
  const double down = xm - step;
  const double delta_up = up - xm;
  const double delta_down = xm - down;

  double diff = 0.0;
  for (std::size_t i = std::max<std::size_t>(1, m - 1); i < k; ++i) {
    // d D~_i / d x_m
    double du = 0.0;
    if (i + 1 < k) {
      if (i + 1 == m) du = inv_2h;
      else if (i == m + 1) du = -inv_2h;
    } else {
      if (m == k - 2) du = -4.0 * inv_2h;
      else if (m == k - 3) du = inv_2h;
    }
    double slope = u_factor_[i] * du;
    if (i >= m) {
      const double* vf = &v_factor_[i * orders];
      for (std::size_t q = 0; q < orders; ++q) {
        const double dv = i == m ? moment_weights_[q].hi[m - 1] : base.moment_step[q];
        slope += vf[q] * dv;
      }
    }
    double x_up = base.x[i];
    double x_down = base.x[i];
    if (i == m) {
      slope += x_factor_[i];
      x_up = up;
      x_down = down;
    }
    const double f_up = lagrangian_at(i, x_up, base.d[i] + delta_up * slope);
    const double f_down = lagrangian_at(i, x_down, base.d[i] - delta_down * slope);
    diff += weights_[i] * (f_up - f_down);
  }
  return diff / (up - down);
}

std::vector<double> Transcription::gradient(std::span<const double> interior) const {
  const DiscreteTrajectory traj = assemble(interior);
  const std::size_t orders = moment_weights_.size();
  const auto n = static_cast<long>(dimension());
  std::vector<double> g(dimension());
  std::exception_ptr error;
  long error_index = n;

#pragma omp parallel
  {
    Linearization base{traj.x, traj.d, std::vector<double>(orders)};
#pragma omp for schedule(static)
    for (long j = 0; j < n; ++j) {
      const auto m = static_cast<std::size_t>(j) + 1;
      for (std::size_t q = 0; q < orders; ++q) {
        base.moment_step[q] = moment_weights_[q].hi[m - 1] + moment_weights_[q].lo[m];
      }
      try {
        g[static_cast<std::size_t>(j)] = partial_incremental(base, static_cast<std::size_t>(j));
      } catch (...) {
#pragma omp critical(hadamard_gradient_error)
        {
          // Report the lowest failing coordinate, as the serial loop would.
          if (j < error_index) {
            error_index = j;
            error = std::current_exception();
          }
        }
      }
    }
  }
  if (error) std::rethrow_exception(error);
  return g;
}

DiscreteTrajectory assemble(std::span<const double> interior_x, const ProblemSpec& spec,
                            const Grid& grid, const ExpansionCoefficients& coeffs) {
  return Transcription(spec, grid, coeffs).assemble(interior_x);
}

double objective(std::span<const double> interior_x, const ProblemSpec& spec, const Grid& grid,
                 const ExpansionCoefficients& coeffs) {
  return Transcription(spec, grid, coeffs).objective(interior_x);
}

std::vector<double> objective_gradient(std::span<const double> interior_x, const ProblemSpec& spec,
                                       const Grid& grid, const ExpansionCoefficients& coeffs) {
  return Transcription(spec, grid, coeffs).gradient(interior_x);
}

}  // namespace hadamard
