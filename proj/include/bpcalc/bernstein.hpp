#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "bpcalc/quadrature.hpp"

namespace bpcalc {

using Vector = Eigen::VectorXd;

enum class Family { FractionalPower, Log, CompoundPoisson, Linear, Triple, RaySum };

/// Short tags used in documents and CSV output: frac, log, cpoisson, linear,
/// triple, raysum.
std::string_view family_tag(Family family);
Family family_from_tag(std::string_view tag);

/// Point mass of a Levy measure: weight * delta_{location}.
struct Atom {
  Vector location;
  double weight = 0.0;
};

enum class DensityKind {
  Stable,  // rho(r) = alpha / Gamma(1 - alpha) * r^{-1-alpha}
  Gamma,   // rho(r) = exp(-r) / r
};

/// weight * rho(r) dr on (0, inf), pushed forward along r -> r * direction.
struct RayDensity {
  Vector direction;
  DensityKind kind = DensityKind::Stable;
  double alpha = 0.5;
  double weight = 1.0;

  double density(double r) const;
  /// Mass of (r, inf).
  double tail_mass(double r) const;
  /// Integral of r * rho(r) over (0, eps).
  double first_moment(double eps) const;
  /// Closed form of the integral of (exp(sigma r) - 1) rho(r) dr, sigma <= 0.
  double psi(double sigma) const;
};

/// (c0, c1, mu) of the Levy-Khintchine type representation
///   psi(s) = c0 + c1 . s + int (exp(s . u) - 1) dmu(u).
/// mu is a finite list of atoms plus ray densities.
class LevyTriple {
 public:
  LevyTriple(double c0, Vector c1, std::vector<Atom> atoms = {}, std::vector<RayDensity> rays = {});

  int dimension() const noexcept { return static_cast<int>(c1_.size()); }
  double c0() const noexcept { return c0_; }
  const Vector& c1() const noexcept { return c1_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<RayDensity>& rays() const noexcept { return rays_; }

  /// Total mass of the atomic part.
  double atom_mass() const;
  /// int min(1, |u|_1) dmu(u); finite for every constructible triple.
  double integrability() const;

 private:
  double c0_;
  Vector c1_;
  std::vector<Atom> atoms_;
  std::vector<RayDensity> rays_;
};

class BernsteinSpec;

/// One summand weight * phi(direction . s) of a ray sum; phi is one-dimensional.
struct RayTerm {
  Vector direction;
  double weight = 1.0;
  std::shared_ptr<const BernsteinSpec> inner;
};

/// A Bernstein function psi of n variables: a closed-form family, an explicit
/// Levy triple, or a ray sum. Immutable once built; all factories validate.
///
/// FractionalPower and Log of dimension n act on the coordinate sum:
/// -(-(s_1 + ... + s_n))^alpha and -log(1 - (s_1 + ... + s_n)).
class BernsteinSpec {
 public:
  static BernsteinSpec fractional_power(double alpha, int dimension = 1);
  static BernsteinSpec log(int dimension = 1);
  static BernsteinSpec compound_poisson(std::vector<Atom> atoms);
  /// rate * (exp(jump * s) - 1), one-dimensional.
  static BernsteinSpec compound_poisson(double rate, double jump);
  static BernsteinSpec linear(double c0, Vector c1);
  static BernsteinSpec triple(LevyTriple triple);
  static BernsteinSpec ray_sum(std::vector<RayTerm> terms);

  Family family() const noexcept { return family_; }
  int dimension() const noexcept { return dimension_; }

  double alpha() const;
  const std::vector<Atom>& atoms() const;
  double c0() const;
  const Vector& c1() const;
  const LevyTriple& levy_triple() const;
  const std::vector<RayTerm>& terms() const;

  /// The Levy triple of psi. Exact for every variant.
  LevyTriple to_triple() const;

  /// Decomposition of psi into weighted one-dimensional closed forms along
  /// rays (inner family FractionalPower, Log, CompoundPoisson or Linear).
  std::vector<RayTerm> elementary_terms() const;

 private:
  BernsteinSpec() = default;

  Family family_ = Family::Linear;
  int dimension_ = 1;
  double alpha_ = 0.0;
  double c0_ = 0.0;
  Vector c1_;
  std::vector<Atom> atoms_;
  std::shared_ptr<const LevyTriple> triple_;
  std::vector<RayTerm> terms_;
};

std::shared_ptr<const BernsteinSpec> share(BernsteinSpec spec);

/// psi(s) for s in the open negative orthant. Triple variants integrate the
/// Levy measure numerically with `quad`; all others use closed forms.
double eval_psi(const BernsteinSpec& spec, const Vector& s, const QuadratureScheme& quad = {});

/// Same as eval_psi on the closed orthant (components may be zero), the
/// boundary value being the limit from inside.
double eval_psi_closure(const BernsteinSpec& spec, const Vector& s,
                        const QuadratureScheme& quad = {});

/// c0 = lim psi(s) as s -> -0.
double psi_limit_at_zero(const BernsteinSpec& spec);

/// a * psi1 + b * psi2 for a, b >= 0, as a ray sum.
BernsteinSpec conic_combination(double a, const BernsteinSpec& psi1, double b,
                                const BernsteinSpec& psi2);

/// True when psi is bounded on the negative orthant (no drift, no densities).
bool is_bounded(const BernsteinSpec& spec);

struct MembershipEntry {
  std::vector<int> multi_index;
  /// Smallest divided forward difference over the grid.
  double min_estimate = 0.0;
  /// Worst (most negative) undivided difference relative to its tolerance.
  double worst_margin = 0.0;
  Vector worst_point;
  bool ok = true;
};

struct MembershipReport {
  std::vector<MembershipEntry> entries;
  double max_psi = 0.0;
  bool nonpositive = true;
  /// Order |alpha| of the first failing multi-index, 0 when none fails.
  int first_failing_order = 0;
  bool pass = true;
};

/// Forward-difference test of the sign conditions that define the class.
/// Step h_j = 0.05 |s_j|. A multi-index passes at s when its undivided
/// difference is >= -1e-6 (1 + |psi(s)|).
MembershipReport check_membership(const std::function<double(const Vector&)>& psi, int dimension,
                                  const std::vector<Vector>& grid, int max_order);
MembershipReport check_membership(const BernsteinSpec& spec, const std::vector<Vector>& grid,
                                  int max_order, const QuadratureScheme& quad = {});

/// Cartesian grid of -v with v log-spaced in [lo, hi] per coordinate.
std::vector<Vector> log_grid(int dimension, double lo, double hi, int per_coordinate);

}  // namespace bpcalc
