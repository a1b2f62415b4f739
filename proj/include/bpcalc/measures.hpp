#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bpcalc/bernstein.hpp"
#include "bpcalc/quadrature.hpp"

namespace bpcalc {

/// Explicit positive measure on R_+^n: atoms plus quadrature nodes that
/// discretize an absolutely continuous part. Locations are stored column-wise.
struct DiscreteMeasure {
  Eigen::MatrixXd atom_locations;
  Eigen::VectorXd atom_masses;
  Eigen::MatrixXd node_locations;
  Eigen::VectorXd node_weights;

  static DiscreteMeasure empty(int dimension);
  static DiscreteMeasure unit_atom(const Vector& location, double mass = 1.0);

  int dimension() const noexcept { return static_cast<int>(atom_locations.rows()); }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(atom_masses.size() + node_weights.size());
  }
  double total_mass() const;
  /// sum of mass * exp(s . location) over atoms and nodes.
  double laplace(const Vector& s) const;
};

/// The subordination measure nu_t, i.e. the measure whose Laplace transform
/// at -s is exp(t psi(s)).
///
/// nu_t is held as a convolution product of factors, one per elementary ray
/// term of psi; each factor is a one-dimensional measure pushed forward along
/// its direction. `materialized` expands the product into a single explicit
/// factor.
class SubMeasure {
 public:
  SubMeasure(int dimension, double t, std::string family, std::vector<DiscreteMeasure> factors,
             double residual, double tolerance);

  /// Unit atom at the origin (nu_0 for every psi).
  static SubMeasure unit_atom(int dimension, std::string family = "unit");

  int dimension() const noexcept { return dimension_; }
  double t() const noexcept { return t_; }
  const std::string& family() const noexcept { return family_; }
  std::span<const DiscreteMeasure> factors() const noexcept { return factors_; }
  /// Certified bound on |L(nu)(-s) - exp(t psi(s))| over the probe set.
  double residual() const noexcept { return residual_; }
  double tolerance() const noexcept { return tolerance_; }

  double total_mass() const;
  /// Product of factor transforms; no domain checks.
  double laplace(const Vector& s) const;
  /// Single-factor expansion. Exact while the number of points stays within
  /// max_points; beyond that, nodes are merged into log-spaced bins (anchored
  /// so that `anchor` is a bin edge in every coordinate) preserving mass and
  /// first moment per bin.
  SubMeasure materialized(std::size_t max_points, double anchor = 1.0) const;

 private:
  int dimension_;
  double t_;
  std::string family_;
  std::vector<DiscreteMeasure> factors_;
  double residual_;
  double tolerance_;
};

/// Builds nu_t for psi. Throws AccuracyError when a factor cannot be brought
/// within quad.measure_tol / (number of factors).
SubMeasure subordination_measure(const BernsteinSpec& spec, double t, const QuadratureScheme& quad = {});

/// L(m)(s) for s in the closed nonpositive orthant; at s = 0 the total mass.
double laplace_transform(const SubMeasure& m, const Vector& s);

/// Convolution by node-pair aggregation (see SubMeasure::materialized for
/// the compression rule). Atom-atom pairs convolve exactly.
SubMeasure convolve(const SubMeasure& a, const SubMeasure& b, const QuadratureScheme& quad = {});

DiscreteMeasure convolve_points(const DiscreteMeasure& a, const DiscreteMeasure& b, std::size_t max_points,
                                double anchor = 1.0);

/// mu({u : |u|_1 > R}).
double levy_tail_mass(const LevyTriple& triple, double radius);

/// max over the probe set of |L(m)(-s) - exp(t psi(s))|.
double laplace_residual(const SubMeasure& m, const BernsteinSpec& spec, const ProbeSet& probe,
                        const QuadratureScheme& quad = {});

/// CSV export: a `#` metadata line carrying t, family and residual, then the
/// header `kind,u_1..u_n,mass` and one row per atom or node.
void write_csv(std::ostream& out, const SubMeasure& m, std::size_t max_points = 200000);

}  // namespace bpcalc
