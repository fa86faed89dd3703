#include "stirap/quadrature.hpp"

#include <array>
#include <cmath>

namespace stirap {

namespace {

// Kronrod 15-point nodes on [-1, 1] (non-negative half) and weights; every
// other node is a 7-point Gauss node.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double kronrod;
  double gauss;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = kKronrod[7] * fc;
  double g = kGauss[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double x = h * kNodes[i];
    const double s = f(c - x) + f(c + x);
    k += kKronrod[i] * s;
    if (i % 2 == 1) g += kGauss[i / 2] * s;
  }
  return {k * h, g * h};
}

void recurse(const std::function<double(double)>& f, double a, double b, double abs_tol, double rel_tol,
             int depth, QuadratureResult& acc) {
  const Panel p = gk15(f, a, b);
  const double err = std::abs(p.kronrod - p.gauss);
  if (err <= std::max(abs_tol, rel_tol * std::abs(p.kronrod)) || depth <= 0) {
    if (depth <= 0 && err > abs_tol) acc.converged = false;
    acc.value += p.kronrod;
    acc.error_estimate += err;
    return;
  }
  const double m = 0.5 * (a + b);
  recurse(f, a, m, 0.5 * abs_tol, rel_tol, depth - 1, acc);
  recurse(f, m, b, 0.5 * abs_tol, rel_tol, depth - 1, acc);
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                                    double rel_tol, int max_depth) {
  QuadratureResult acc;
  acc.value = 0.0;
  if (a == b) return acc;
  recurse(f, a, b, abs_tol, rel_tol, max_depth, acc);
  return acc;
}

}  // namespace stirap
