#include "bpcalc/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>

#include <fmt/core.h>

#include "bpcalc/errors.hpp"
#include "bpcalc/levy_quadrature.hpp"
#include "bpcalc/spec_io.hpp"

namespace bpcalc {

namespace {

using cd = std::complex<double>;

cd complex_expm1(cd z) {
  if (z.imag() == 0.0) return {std::expm1(z.real()), 0.0};
  const double sh = std::sin(0.5 * z.imag());
  return {std::expm1(z.real()) * std::cos(z.imag()) - 2.0 * sh * sh, std::exp(z.real()) * std::sin(z.imag())};
}

void check_x(const CommutingGeneratorSet& set, const CVector& x) {
  if (x.size() != set.d()) {
    throw ShapeError(fmt::format("vector of length {} for state dimension {}", x.size(), set.d()));
  }
}

/// Accumulates sum_i w_i (T(r_i c) - I) x for one ray direction c.
class RayAccumulator {
 public:
  RayAccumulator(const CommutingGeneratorSet& set, const Vector& direction, const CVector& x)
      : set_(set), direction_(direction), x_(x) {
    if (set.fast_basis()) {
      const SharedEigenbasis& b = *set.eigenbasis();
      coeffs_ = b.inverse * x;
      rates_ = b.eigenvalues.transpose() * direction.cast<cd>();
      sum_ = CVector::Zero(x.size());
    } else {
      sum_ = CVector::Zero(x.size());
    }
  }

  void add(double r, double w) {
    if (w == 0.0) return;
    if (set_.fast_basis()) {
      for (Eigen::Index k = 0; k < sum_.size(); ++k) sum_[k] += w * complex_expm1(r * rates_[k]);
    } else {
      sum_ += w * semigroup_minus_identity(set_, r * direction_, x_);
    }
  }

  CVector result() const {
    if (set_.fast_basis()) return set_.eigenbasis()->vectors * sum_.cwiseProduct(coeffs_);
    return sum_;
  }

 private:
  const CommutingGeneratorSet& set_;
  Vector direction_;
  CVector x_;
  CVector coeffs_;
  CVector rates_;
  CVector sum_;
};

/// int (T(r c) - I) x rho(r) dr along one ray, with its certified truncation error.
Application ray_application(const RayDensity& ray, const CommutingGeneratorSet& set, const CVector& x,
                            double budget, const QuadratureScheme& quad) {
  const double mn = std::pow(set.m_bound(), set.n());
  const CMatrix b = set.combination(ray.direction);
  const double bx = (b * x).norm();
  if (bx == 0.0) return {CVector::Zero(x.size()), 0.0};  // T(r c) x = x for every r

  const double near = near_cutoff(ray, mn * bx, budget, quad.split_radius);
  const double near_error = mn * bx * ray.first_moment(near);

  // remainder beyond R is int_R^inf T(r c) x rho dr - tail(R) x; the first
  // part is bounded by M^n ||T(R c) x|| tail(R)
  double far = std::max(quad.far_truncation, 10.0 * quad.split_radius);
  auto far_bound = [&](double r) { return mn * semigroup_apply(set, r * ray.direction, x).norm() * ray.tail_mass(r); };
  double far_error = far_bound(far);
  while (far_error > budget && far < quad.max_far_truncation) {
    far *= 10.0;
    far_error = far_bound(far);
  }
  if (far_error > budget) {
    throw AccuracyError(fmt::format("Levy tail bound {:.3e} exceeds {:.3e} at truncation {:.3e}; "
                                    "increase far_truncation or tol",
                                    far_error, budget, far),
                        far_error);
  }
  const RayRule rule = ray_rule(ray, near, far, quad);
  RayAccumulator acc(set, ray.direction, x);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) acc.add(rule.nodes[i], rule.weights[i]);
  CVector value = acc.result() - ray.tail_mass(far) * x;
  return {std::move(value), near_error + far_error};
}

struct MeasureCache {
  std::mutex mutex;
  std::map<std::string, std::shared_ptr<const SubMeasure>> entries;
};

std::string cache_key(const BernsteinSpec& spec, double t, const QuadratureScheme& q) {
  return fmt::format("{}|{:a}|{:a}|{}|{}|{}|{:a}|{:a}|{}", serialize_spec(spec), t, q.measure_tol,
                     q.measure_panels_per_decade, q.measure_refinements, q.nodes_per_panel, q.probe.lo, q.probe.hi,
                     q.probe.per_coordinate);
}

std::shared_ptr<const SubMeasure> cached_measure(const BernsteinSpec& spec, double t, const QuadratureScheme& quad) {
  static MeasureCache cache;
  const std::string key = cache_key(spec, t, quad);
  {
    std::lock_guard lock(cache.mutex);
    auto it = cache.entries.find(key);
    if (it != cache.entries.end()) return it->second;
  }
  auto m = std::make_shared<const SubMeasure>(subordination_measure(spec, t, quad));
  std::lock_guard lock(cache.mutex);
  if (cache.entries.size() >= 512) cache.entries.clear();
  cache.entries.emplace(key, m);
  return m;
}

}  // namespace

Application apply_psi_levy(const LevyTriple& triple, const CommutingGeneratorSet& set, const CVector& x,
                           const QuadratureScheme& quad) {
  check_x(set, x);
  if (triple.dimension() != set.n()) {
    throw ShapeError(fmt::format("function of {} variables applied to {} generators", triple.dimension(), set.n()));
  }
  CVector value = triple.c0() * x;
  if (triple.c1().any()) value += set.combination(triple.c1()) * x;
  for (const Atom& a : triple.atoms()) {
    if (a.weight != 0.0) value += a.weight * semigroup_minus_identity(set, a.location, x);
  }
  double error = 0.0;
  const std::size_t rays = triple.rays().size();
  for (const RayDensity& ray : triple.rays()) {
    if (ray.weight == 0.0) continue;
    const double budget = quad.tol * std::max(x.norm(), 1e-300) / (4.0 * static_cast<double>(rays));
    Application part = ray_application(ray, set, x, budget, quad);
    value += part.value;
    error += part.error_bound;
  }
  return {std::move(value), error};
}

Application apply_psi_levy(const BernsteinSpec& spec, const CommutingGeneratorSet& set, const CVector& x,
                           const QuadratureScheme& quad) {
  return apply_psi_levy(spec.to_triple(), set, x, quad);
}

Application apply_measure(const SubMeasure& m, const CommutingGeneratorSet& set, const CVector& x) {
  check_x(set, x);
  if (m.dimension() != set.n()) {
    throw ShapeError(fmt::format("measure on R^{} applied to {} generators", m.dimension(), set.n()));
  }
  const double error = m.residual() * x.norm();
  if (set.fast_basis()) {
    const SharedEigenbasis& b = *set.eigenbasis();
    const CMatrix lt = b.eigenvalues.transpose();  // d x n
    CVector y = b.inverse * x;
    for (const DiscreteMeasure& f : m.factors()) {
      CVector mult = CVector::Zero(y.size());
      auto add = [&](const Eigen::MatrixXd& loc, const Eigen::VectorXd& mass) {
        if (mass.size() == 0) return;
        const CMatrix expo = (lt * loc.cast<cd>()).array().exp().matrix();  // d x points
        mult += expo * mass.cast<cd>();
      };
      add(f.atom_locations, f.atom_masses);
      add(f.node_locations, f.node_weights);
      y = y.cwiseProduct(mult);
    }
    return {b.vectors * y, error};
  }
  CVector y = x;
  for (const DiscreteMeasure& f : m.factors()) {
    CVector next = CVector::Zero(y.size());
    for (Eigen::Index i = 0; i < f.atom_masses.size(); ++i) {
      next += f.atom_masses[i] * semigroup_apply(set, f.atom_locations.col(i), y);
    }
    for (Eigen::Index i = 0; i < f.node_weights.size(); ++i) {
      next += f.node_weights[i] * semigroup_apply(set, f.node_locations.col(i), y);
    }
    y = std::move(next);
  }
  return {std::move(y), error};
}

Application apply_g_t(const BernsteinSpec& spec, const CommutingGeneratorSet& set, double t, const CVector& x,
                      const QuadratureScheme& quad) {
  check_x(set, x);
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("t must be finite and nonnegative");
  if (spec.dimension() != set.n()) {
    throw ShapeError(fmt::format("function of {} variables applied to {} generators", spec.dimension(), set.n()));
  }
  if (t == 0.0) return {x, 0.0};
  return apply_measure(*cached_measure(spec, t, quad), set, x);
}

std::vector<double> default_difference_schedule() {
  std::vector<double> s;
  for (int k = 0; k <= 6; ++k) s.push_back(0.1 * std::ldexp(1.0, -k));
  return s;
}

DifferenceResult generator_via_difference(const BernsteinSpec& spec, const CommutingGeneratorSet& set,
                                          const CVector& x, const std::vector<double>& schedule,
                                          const QuadratureScheme& quad) {
  if (schedule.size() < 2) throw DomainError("difference schedule needs at least two points");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0)) throw DomainError("difference schedule must be positive");
    if (i > 0 && !(schedule[i] < schedule[i - 1])) throw DomainError("difference schedule must be decreasing");
  }
  const std::size_t m = schedule.size();
  std::vector<CVector> quotients;
  for (double t : schedule) quotients.push_back((apply_g_t(spec, set, t, x, quad).value - x) / t);

  // Neville table at 0: table[i] holds the polynomial through points i-k..i
  std::vector<CVector> table = quotients;
  std::vector<double> corrections;
  for (std::size_t k = 1; k < m; ++k) {
    for (std::size_t i = m - 1; i >= k; --i) {
      const double ta = schedule[i - k];
      const double tb = schedule[i];
      table[i] = table[i] + (table[i] - table[i - 1]) * (tb / (ta - tb));
    }
    corrections.push_back((table[m - 1] - table[m - 2]).norm());
  }
  DifferenceResult out;
  out.value = table[m - 1];
  out.schedule = schedule;
  out.residual = corrections.back();

  std::vector<double> raw;
  for (std::size_t i = 0; i + 1 < m; ++i) raw.push_back((quotients[i] - quotients[i + 1]).norm());
  if (raw.size() >= 2 && raw[0] > 0.0 && raw[1] > 0.0) {
    out.observed_order = std::log(raw[0] / raw[1]) / std::log(schedule[0] / schedule[1]);
  }
  const double noise = 1e-12 * (1.0 + out.value.norm()) + 100.0 * quad.measure_tol / schedule.back() * x.norm();
  for (std::size_t k = 1; k < corrections.size(); ++k) {
    if (corrections[k] > corrections[k - 1] && corrections[k] > noise) {
      out.warning = fmt::format("extrapolation corrections not decreasing at level {} ({:.3e} after {:.3e})", k + 1,
                                corrections[k], corrections[k - 1]);
      break;
    }
  }
  return out;
}

CVector apply_psi_spectral(const BernsteinSpec& spec, const CommutingGeneratorSet& set, const CVector& x,
                           const QuadratureScheme& quad) {
  check_x(set, x);
  if (!set.eigenbasis()) throw CapabilityError("the spectral oracle needs a shared eigenbasis");
  if (spec.dimension() != set.n()) {
    throw ShapeError(fmt::format("function of {} variables applied to {} generators", spec.dimension(), set.n()));
  }
  const SharedEigenbasis& b = *set.eigenbasis();
  CVector y = b.inverse * x;
  Vector s(set.n());
  std::vector<double> scales;
  for (int j = 0; j < set.n(); ++j) scales.push_back(1e-10 * (1.0 + spectral_norm(set.matrix(j))));
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    for (int j = 0; j < set.n(); ++j) {
      const cd lambda = b.eigenvalues(j, k);
      const double scale = scales[static_cast<std::size_t>(j)];
      if (std::abs(lambda.imag()) > scale) {
        throw DomainError(fmt::format("joint eigenvalue {} of generator {} is not real: {}+{}i", k, j, lambda.real(),
                                      lambda.imag()));
      }
      if (lambda.real() > scale) {
        throw DomainError(fmt::format("joint eigenvalue {} of generator {} is positive: {}", k, j, lambda.real()));
      }
      s[j] = std::min(lambda.real(), 0.0);
    }
    y[k] *= eval_psi_closure(spec, s, quad);
  }
  return b.vectors * y;
}

CMatrix operator_matrix(int d, const std::function<CVector(const CVector&)>& apply) {
  CMatrix out(d, d);
  for (int k = 0; k < d; ++k) out.col(k) = apply(CVector::Unit(d, k));
  return out;
}

CMatrix psi_matrix_levy(const BernsteinSpec& spec, const CommutingGeneratorSet& set, const QuadratureScheme& quad) {
  const LevyTriple triple = spec.to_triple();
  return operator_matrix(set.d(), [&](const CVector& e) { return apply_psi_levy(triple, set, e, quad).value; });
}

CMatrix g_t_matrix(const BernsteinSpec& spec, const CommutingGeneratorSet& set, double t,
                   const QuadratureScheme& quad) {
  return operator_matrix(set.d(), [&](const CVector& e) { return apply_g_t(spec, set, t, e, quad).value; });
}

}  // namespace bpcalc
