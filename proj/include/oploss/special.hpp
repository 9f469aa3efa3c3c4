#pragma once

namespace oploss {

/// Regularized lower incomplete gamma P(a, x).
double reg_lower_gamma(double a, double x);

/// log B(x, y)
double log_beta(double x, double y);

}  // namespace oploss
