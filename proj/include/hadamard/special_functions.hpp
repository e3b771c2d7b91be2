#pragma once

namespace hadamard {

/// Gamma function on the real line. Throws DomainError at (or within 1e-12 of)
/// a non-positive integer.
double gamma(double z);

struct LogGamma {
  double value;  ///< ln|Gamma(z)|
  int sign;      ///< sign of Gamma(z), +1 or -1
};

/// ln|Gamma(z)| and the sign of Gamma(z); finite where gamma() would overflow.
LogGamma log_gamma_abs(double z);

/// sin(pi*z) with argument reduction, exact zeros at integers.
double sin_pi(double z);

}  // namespace hadamard
