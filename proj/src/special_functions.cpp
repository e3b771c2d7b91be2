#include "hadamard/special_functions.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hadamard/errors.hpp"

namespace hadamard {

namespace {

constexpr double kPoleTolerance = 1e-12;

// Lanczos approximation, g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

void reject_pole(double z) {
  if (z <= 0.5) {
    const double nearest = std::round(z);
    if (nearest <= 0.0 && std::abs(z - nearest) <= kPoleTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "gamma: pole at z = " << z;
      throw DomainError(msg.str());
    }
  }
}

// ln Gamma(z) for z >= 0.5.
double log_gamma_positive(double z) {
  const double zm1 = z - 1.0;
  double series = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) {
    series += kLanczos[i] / (zm1 + static_cast<double>(i));
  }
  const double t = zm1 + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (zm1 + 0.5) * std::log(t) - t +
         std::log(series);
}

// Gamma(z) for 0.5 <= z; small integers are returned exactly.
double gamma_positive(double z) {
  if (z == std::floor(z) && z <= 20.0) {
    double f = 1.0;
    for (int i = 2; i < static_cast<int>(z); ++i) f *= i;
    return f;
  }
  // Shift down into [0.5, 2.5) and rebuild by recurrence: keeps the Lanczos
  // evaluation in its most accurate range for moderate z.
  if (z < 30.0) {
    double product = 1.0;
    double w = z;
    while (w >= 2.5) {
      w -= 1.0;
      product *= w;
    }
    return product * std::exp(log_gamma_positive(w));
  }
  return std::exp(log_gamma_positive(z));
}

}  // namespace

double sin_pi(double z) {
  // Reduce to r in [-1, 1) with sin(pi z) = sin(pi r).
  double r = std::fmod(z, 2.0);
  if (r >= 1.0) r -= 2.0;
  if (r < -1.0) r += 2.0;
  if (r == 0.0 || r == -1.0) return 0.0;
  if (r > 0.5) r = 1.0 - r;
  if (r < -0.5) r = -1.0 - r;
  return std::sin(std::numbers::pi * r);
}

double gamma(double z) {
  reject_pole(z);
  if (z >= 0.5) return gamma_positive(z);
  // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
  return std::numbers::pi / (sin_pi(z) * gamma_positive(1.0 - z));
}

LogGamma log_gamma_abs(double z) {
  reject_pole(z);
  if (z >= 0.5) {
    if (z < 30.0) return {std::log(gamma_positive(z)), 1};
    return {log_gamma_positive(z), 1};
  }
  const double s = sin_pi(z);
  const double reflected = z > -29.0 ? std::log(gamma_positive(1.0 - z))
                                     : log_gamma_positive(1.0 - z);
  return {std::log(std::numbers::pi / std::abs(s)) - reflected, s > 0.0 ? 1 : -1};
}

}  // namespace hadamard
