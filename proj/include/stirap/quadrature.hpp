#pragma once

#include <functional>

namespace stirap {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol = 1e-12, double rel_tol = 1e-12, int max_depth = 40);

}  // namespace stirap
