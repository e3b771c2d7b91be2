#include "hadamard/hadamard_operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "hadamard/compiled_expr.hpp"
#include "hadamard/errors.hpp"
#include "hadamard/special_functions.hpp"

namespace hadamard {

namespace {

void require_same_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    std::ostringstream msg;
    msg << what << ": expected " << want << " samples, got " << got;
    throw ArgumentError(msg.str());
  }
}

// Gamma(p + alpha - 1) / (p - 1)!  for p >= 1.
double gamma_factorial_ratio(int p, double alpha, bool log_domain) {
  if (!log_domain) return gamma(p + alpha - 1.0) / gamma(static_cast<double>(p));
  const LogGamma num = log_gamma_abs(p + alpha - 1.0);
  const LogGamma den = log_gamma_abs(static_cast<double>(p));
  return num.sign * std::exp(num.value - den.value);
}

// ln(t/a) without the cancellation of log(t) - log(a).
double log_ratio(double t, double a) { return std::log1p((t - a) / a); }

// 15-point Gauss-Kronrod with embedded 7-point Gauss.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod(const ScalarFunction& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

// Global adaptive Gauss-Kronrod on [lo, hi] to absolute tolerance.
double integrate_adaptive(const ScalarFunction& f, double lo, double hi, double tol) {
  constexpr int kMaxSegments = 4000;
  std::priority_queue<Segment> work;
  Segment first = gauss_kronrod(f, lo, hi);
  double total = first.value;
  double error = first.error;
  work.push(first);
  int segments = 1;
  while (error > tol) {
    if (segments >= kMaxSegments) {
      std::ostringstream msg;
      msg << "quadrature did not reach tolerance " << tol << " (estimate " << error << ")";
      throw AccuracyError(msg.str(), error);
    }
    const Segment worst = work.top();
    work.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Segment left = gauss_kronrod(f, worst.lo, mid);
    const Segment right = gauss_kronrod(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    work.push(left);
    work.push(right);
    ++segments;
  }
  // Re-sum to shed drift from the incremental updates.
  total = 0.0;
  while (!work.empty()) {
    total += work.top().value;
    work.pop();
  }
  return total;
}

}  // namespace

ExpansionCoefficients expansion_coefficients(FractionalOrder alpha, int N) {
  if (N < 2) throw ArgumentError("expansion order N must be >= 2, got " + std::to_string(N));
  const double al = alpha.value();
  const bool log_domain = N > 20;

  double a_sum = 1.0;
  double b_sum = 1.0;
  std::vector<double> c(static_cast<std::size_t>(N - 1));
  const double gamma_alpha = gamma(al);
  const double gamma_alpha_m1 = gamma(al - 1.0);
  const double c_denominator = gamma(-al) * gamma(1.0 + al);

  b_sum += gamma_factorial_ratio(1, al, log_domain) / gamma_alpha_m1;
  for (int p = 2; p <= N; ++p) {
    const double ratio = gamma_factorial_ratio(p, al, log_domain);
    a_sum += ratio / gamma_alpha;
    b_sum += ratio / (p * gamma_alpha_m1);
    c[static_cast<std::size_t>(p - 2)] = ratio / c_denominator;
  }
  return {alpha, N, a_sum / gamma(1.0 - al), b_sum / gamma(2.0 - al), std::move(c)};
}

double exact_derivative_logpower(double beta, FractionalOrder alpha, double a, double t) {
  if (!(a > 0.0) || !(t > a)) throw DomainError("logpower derivative needs t > a > 0");
  const double al = alpha.value();
  return gamma(beta + 1.0) / gamma(beta + 1.0 - al) * std::pow(log_ratio(t, a), beta - al);
}

double exact_derivative_quadrature(const ScalarFunction& x, const ScalarFunction& dx,
                                   FractionalOrder alpha, double a, double t, double tol) {
  if (!(a > 0.0) || !(t > a)) throw DomainError("quadrature derivative needs t > a > 0");
  if (!(tol >= 1e-10)) throw ArgumentError("quadrature tolerance must be >= 1e-10");
  const double al = alpha.value();
  const double L = log_ratio(t, a);
  const double exponent = 1.0 / (1.0 - al);

  // int_a^t ln(t/tau)^{-alpha} x'(tau) dtau
  //   = 1/(1-alpha) int_0^{L^{1-alpha}} x'(t e^{-s}) t e^{-s} dw,   s = w^{1/(1-alpha)}.
  const ScalarFunction integrand = [&](double w) {
    const double tau = t * std::exp(-std::pow(w, exponent));
    return dx(tau) * tau;
  };
  const double gamma_2ma = gamma(2.0 - al);
  const double upper = std::pow(L, 1.0 - al);
  // Split the tolerance between the integral and rounding in the boundary term.
  const double integral = integrate_adaptive(integrand, 0.0, upper, 0.5 * tol * gamma_2ma);
  return x(a) * std::pow(L, -al) / gamma(1.0 - al) + integral / gamma_2ma;
}

MomentWeights moment_weights(const Grid& grid, int p, MomentRule rule) {
  if (p < 2) throw ArgumentError("moment order p must be >= 2");
  const std::size_t k = grid.size();
  MomentWeights w{p, rule, std::vector<double>(k - 1), std::vector<double>(k - 1)};
  std::vector<double> s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = log_ratio(grid[i], grid.a);

  if (rule == MomentRule::Trapezoid) {
    for (std::size_t i = 0; i + 1 < k; ++i) {
      const double h = grid[i + 1] - grid[i];
      w.lo[i] = 0.5 * h * (p - 1) * std::pow(s[i], p - 2) / grid[i];
      w.hi[i] = 0.5 * h * (p - 1) * std::pow(s[i + 1], p - 2) / grid[i + 1];
    }
    return w;
  }

  // int_{s0}^{s1} (p-1) s^{p-2} ((s1 - s) x0 + (s - s0) x1) / (s1 - s0) ds
  const double pm1 = p - 1.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const double s0 = s[i];
    const double s1 = s[i + 1];
    const double span = s1 - s0;
    const double zeroth = std::pow(s1, pm1) - std::pow(s0, pm1);           // int (p-1) s^{p-2}
    const double first = pm1 / p * (std::pow(s1, p) - std::pow(s0, p));   // int (p-1) s^{p-1}
    w.lo[i] = (s1 * zeroth - first) / span;
    w.hi[i] = (first - s0 * zeroth) / span;
  }
  return w;
}

MomentTrajectory moment_values(std::span<const double> x, const MomentWeights& weights) {
  require_same_size(x.size(), weights.lo.size() + 1, "moment_values");
  MomentTrajectory m{weights.p, std::vector<double>(x.size())};
  m.values[0] = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    m.values[i + 1] = m.values[i] + weights.lo[i] * x[i] + weights.hi[i] * x[i + 1];
  }
  return m;
}

MomentTrajectory moment_values(std::span<const double> x, const Grid& grid, int p,
                               MomentRule rule) {
  require_same_size(x.size(), grid.size(), "moment_values");
  return moment_values(x, moment_weights(grid, p, rule));
}

std::vector<double> approximate_derivative(std::span<const double> x, std::span<const double> u,
                                           std::span<const MomentTrajectory> moments,
                                           const ExpansionCoefficients& coeffs, const Grid& grid) {
  const std::size_t k = grid.size();
  require_same_size(x.size(), k, "approximate_derivative (x)");
  require_same_size(u.size(), k, "approximate_derivative (u)");

  std::vector<const MomentTrajectory*> by_order(static_cast<std::size_t>(coeffs.order + 1), nullptr);
  for (const auto& m : moments) {
    if (m.p >= 2 && m.p <= coeffs.order) by_order[static_cast<std::size_t>(m.p)] = &m;
  }
  for (int p = 2; p <= coeffs.order; ++p) {
    const auto* m = by_order[static_cast<std::size_t>(p)];
    if (m == nullptr) throw ArgumentError("missing moment of order " + std::to_string(p));
    require_same_size(m->values.size(), k, "approximate_derivative (moment)");
  }

  const double al = coeffs.alpha.value();
  std::vector<double> d(k, 0.0);
  for (std::size_t i = 1; i < k; ++i) {
    const double t = grid[i];
    const double L = log_ratio(t, grid.a);
    double value = coeffs.A * std::pow(L, -al) * x[i] + coeffs.B * std::pow(L, 1.0 - al) * t * u[i];
    for (int p = 2; p <= coeffs.order; ++p) {
      value += coeffs.c(p) * std::pow(L, 1.0 - al - p) * by_order[static_cast<std::size_t>(p)]->values[i];
    }
    d[i] = value;
  }
  return d;
}

PointwiseErrorBound pointwise_error_bound(std::span<const double> dx, std::span<const double> d2x,
                                          FractionalOrder alpha, int N, const Grid& grid) {
  const std::size_t k = grid.size();
  require_same_size(dx.size(), k, "pointwise_error_bound (dx)");
  require_same_size(d2x.size(), k, "pointwise_error_bound (d2x)");
  if (N < 2) throw ArgumentError("expansion order N must be >= 2");

  const double al = alpha.value();
  const double one_m = 1.0 - al;
  const double factor = std::exp(one_m * one_m + one_m) /
                        (gamma(2.0 - al) * one_m * std::pow(static_cast<double>(N), one_m));

  PointwiseErrorBound out{std::vector<double>(k, 0.0), 0.0};
  double running = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double c = std::abs(dx[i] + grid[i] * d2x[i]);
    if (std::isnan(c)) c = std::numeric_limits<double>::infinity();
    running = std::max(running, c);
    if (i == 0) continue;
    const double L = log_ratio(grid[i], grid.a);
    const double shape = std::pow(L, one_m) * (grid[i] - grid.a);
    out.values[i] = running == 0.0 ? 0.0 : running * factor * shape;
  }
  out.curvature_max = running;
  return out;
}

double functional_error_bound(std::span<const double> x, std::span<const double> dx,
                              std::span<const double> d2x, const ProblemSpec& problem,
                              const Grid& grid) {
  const std::size_t k = grid.size();
  require_same_size(x.size(), k, "functional_error_bound (x)");

  const auto coeffs = expansion_coefficients(problem.alpha, problem.N);
  std::vector<MomentTrajectory> moments;
  for (int p = 2; p <= problem.N; ++p) moments.push_back(moment_values(x, grid, p));
  const auto d = approximate_derivative(x, dx, moments, coeffs, grid);

  const dsl::CompiledExpr lagrangian(problem.lagrangian);
  double m = 0.0;
  for (std::size_t i = 1; i < k; ++i) {
    const double step = 1e-6 * (1.0 + std::abs(d[i]));
    const double up = lagrangian(grid[i], x[i], d[i] + step);
    const double down = lagrangian(grid[i], x[i], d[i] - step);
    m = std::max(m, std::abs(up - down) / (2.0 * step));
  }
  if (m == 0.0) return 0.0;

  const auto bound = pointwise_error_bound(dx, d2x, problem.alpha, problem.N, grid);
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    integral += 0.5 * (grid[i + 1] - grid[i]) * (bound.values[i] + bound.values[i + 1]);
  }
  return m * integral;
}

}  // namespace hadamard
