#pragma once

#include <cmath>

#include "eigenmodel/errors.hpp"

namespace eigenmodel {

/// Mean of PG(1, c): (1/(2c)) (e^c - 1)/(1 + e^c) = tanh(c/2)/(2c), equal to
/// 1/4 at c = 0. Evaluated through e^{-c} so large c cannot overflow.
inline double pg_mean(double c) {
  if (!(c >= 0.0) || !std::isfinite(c))
    throw ValidationError("pg_mean needs a finite, nonnegative tilt");
  if (c < 1e-4) return 0.25 - c * c / 48.0;
  const double e = std::exp(-c);
  return (-std::expm1(-c)) / (1.0 + e) / (2.0 * c);
}

}  // namespace eigenmodel
