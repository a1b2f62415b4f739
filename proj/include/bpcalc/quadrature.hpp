#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace bpcalc {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached per n; safe to call from several threads.
const GaussRule& gauss_legendre(int n);

/// Probe points for Laplace-residual certification: `per_coordinate`
/// log-spaced magnitudes in [lo, hi] per coordinate, negated.
struct ProbeSet {
  int per_coordinate = 25;
  double lo = 1e-2;
  double hi = 1e2;

  std::vector<Eigen::VectorXd> points(int dimension) const;
  std::vector<double> magnitudes() const;
};

/// Discretization parameters for every improper integral in the calculus.
///
/// The Levy integral along a ray is split at `split_radius`; the near part is
/// integrated on log-spaced panels down to a cutoff chosen so the dropped
/// piece is certified by the first-order bound, the far part up to a
/// truncation radius that starts at `far_truncation` and grows tenfold until
/// the tail bound meets tol/4 (or `max_far_truncation` is hit).
///
/// Subordination measures are discretized on log-spaced panels with
/// `measure_panels_per_decade`, doubled up to `measure_refinements` times until
/// each factor's Laplace residual is within `measure_tol`.
struct QuadratureScheme {
  double split_radius = 1.0;
  double far_truncation = 100.0;
  double max_far_truncation = 1e12;
  int nodes_per_panel = 16;
  int panels = 24;
  double tol = 1e-8;

  double measure_tol = 1e-10;
  int measure_panels_per_decade = 2;
  int measure_refinements = 3;
  ProbeSet probe;
  std::size_t max_points = 200000;
};

/// `count` log-spaced values from lo to hi inclusive (lo, hi > 0).
std::vector<double> log_space(double lo, double hi, int count);

}  // namespace bpcalc
