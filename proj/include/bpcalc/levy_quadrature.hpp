#pragma once

#include <vector>

#include "bpcalc/bernstein.hpp"
#include "bpcalc/quadrature.hpp"

namespace bpcalc {

/// Quadrature for int_{near}^{far} f(r) rho(r) dr: nodes r and weights that
/// already include the density. Panels are log-spaced, split at the scheme's
/// split_radius.
struct RayRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double near = 0.0;
  double far = 0.0;
};

RayRule ray_rule(const RayDensity& density, double near, double far, const QuadratureScheme& quad);

/// Largest cutoff eps (at most split_radius / 1000) such that
/// slope * first_moment(eps) <= budget.
double near_cutoff(const RayDensity& density, double slope, double budget, double split_radius);

/// int (exp(sigma r) - 1) rho(r) dr for sigma <= 0 by quadrature, with the
/// certified truncation bound written to *error_bound when non-null.
/// Throws AccuracyError when the far truncation cannot meet quad.tol / 4.
double ray_integral(const RayDensity& density, double sigma, const QuadratureScheme& quad,
                    double* error_bound = nullptr);

}  // namespace bpcalc
