#include "bpcalc/levy_quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "bpcalc/errors.hpp"

namespace bpcalc {

namespace {

void add_log_panels(const RayDensity& density, double lo, double hi, int panels, const GaussRule& rule,
                    RayRule& out) {
  const double ylo = std::log(lo);
  const double width = (std::log(hi) - ylo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double center = ylo + (p + 0.5) * width;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double r = std::exp(center + 0.5 * width * rule.nodes[i]);
      out.nodes.push_back(r);
      out.weights.push_back(0.5 * width * rule.weights[i] * r * density.density(r));
    }
  }
}

int panels_for(double lo, double hi, int minimum) {
  return std::max(minimum, static_cast<int>(std::ceil(2.0 * std::log10(hi / lo))));
}

}  // namespace

RayRule ray_rule(const RayDensity& density, double near, double far, const QuadratureScheme& quad) {
  const GaussRule& rule = gauss_legendre(quad.nodes_per_panel);
  const double split = quad.split_radius;
  RayRule out;
  out.near = near;
  out.far = far;
  add_log_panels(density, near, split, panels_for(near, split, quad.panels), rule, out);
  if (far > split) add_log_panels(density, split, far, panels_for(split, far, 2), rule, out);
  return out;
}

double near_cutoff(const RayDensity& density, double slope, double budget, double split_radius) {
  const double cap = split_radius * 1e-3;
  if (slope <= 0.0) return cap;
  const double target = budget / slope;
  double eps = cap;
  switch (density.kind) {
    case DensityKind::Stable: {
      const double a = density.alpha;
      // weight * a / ((1-a) Gamma(1-a)) * eps^{1-a} = target
      const double coeff = density.weight * a / ((1.0 - a) * std::tgamma(1.0 - a));
      eps = std::pow(target / coeff, 1.0 / (1.0 - a));
      break;
    }
    case DensityKind::Gamma: {
      const double q = target / density.weight;
      eps = q < 1.0 ? -std::log1p(-q) : cap;
      break;
    }
  }
  eps = std::min(eps, cap);
  // keep the panels representable
  return std::max(eps, 1e-300);
}

double ray_integral(const RayDensity& density, double sigma, const QuadratureScheme& quad,
                    double* error_bound) {
  if (sigma == 0.0) {
    if (error_bound) *error_bound = 0.0;
    return 0.0;
  }
  const double budget = quad.tol / 4.0;
  const double near = near_cutoff(density, -sigma, budget, quad.split_radius);
  double far = std::max(quad.far_truncation, 10.0 * quad.split_radius);
  auto tail_bound = [&](double r) { return std::exp(sigma * r) * density.tail_mass(r); };
  while (tail_bound(far) > budget && far < quad.max_far_truncation) far *= 10.0;
  const double tail = tail_bound(far);
  if (tail > budget) {
    throw AccuracyError(fmt::format("ray integral tail bound {:.3e} exceeds {:.3e} at truncation {:.3e}",
                                    tail, budget, far),
                        tail);
  }
  const RayRule rule = ray_rule(density, near, far, quad);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * std::expm1(sigma * rule.nodes[i]);
  sum -= density.tail_mass(far);
  if (error_bound) *error_bound = -sigma * density.first_moment(near) + tail;
  return sum;
}

}  // namespace bpcalc
