#include "bpcalc/measures.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <ostream>
#include <unordered_map>

#include <boost/math/special_functions/gamma.hpp>
#include <fmt/core.h>

#include "bpcalc/csv.hpp"
#include "bpcalc/errors.hpp"
#include "bpcalc/stable_density.hpp"

namespace bpcalc {

// --- DiscreteMeasure -------------------------------------------------------

DiscreteMeasure DiscreteMeasure::empty(int dimension) {
  DiscreteMeasure m;
  m.atom_locations.resize(dimension, 0);
  m.node_locations.resize(dimension, 0);
  return m;
}

DiscreteMeasure DiscreteMeasure::unit_atom(const Vector& location, double mass) {
  DiscreteMeasure m = empty(static_cast<int>(location.size()));
  m.atom_locations = location;
  m.atom_masses = Vector::Constant(1, mass);
  return m;
}

double DiscreteMeasure::total_mass() const { return atom_masses.sum() + node_weights.sum(); }

double DiscreteMeasure::laplace(const Vector& s) const {
  double v = 0.0;
  if (atom_masses.size() > 0) {
    v += atom_masses.dot((atom_locations.transpose() * s).array().exp().matrix());
  }
  if (node_weights.size() > 0) {
    v += node_weights.dot((node_locations.transpose() * s).array().exp().matrix());
  }
  return v;
}

// --- SubMeasure ------------------------------------------------------------

SubMeasure::SubMeasure(int dimension, double t, std::string family, std::vector<DiscreteMeasure> factors,
                       double residual, double tolerance)
    : dimension_(dimension), t_(t), family_(std::move(family)), factors_(std::move(factors)),
      residual_(residual), tolerance_(tolerance) {
  for (const DiscreteMeasure& f : factors_) {
    if (f.dimension() != dimension_) throw ShapeError("measure factor of wrong dimension");
  }
}

SubMeasure SubMeasure::unit_atom(int dimension, std::string family) {
  return SubMeasure(dimension, 0.0, std::move(family), {DiscreteMeasure::unit_atom(Vector::Zero(dimension))},
                    0.0, 0.0);
}

double SubMeasure::total_mass() const {
  double m = 1.0;
  for (const DiscreteMeasure& f : factors_) m *= f.total_mass();
  return m;
}

double SubMeasure::laplace(const Vector& s) const {
  double v = 1.0;
  for (const DiscreteMeasure& f : factors_) v *= f.laplace(s);
  return v;
}

SubMeasure SubMeasure::materialized(std::size_t max_points, double anchor) const {
  if (factors_.size() == 1) return *this;
  DiscreteMeasure acc = DiscreteMeasure::unit_atom(Vector::Zero(dimension_));
  for (const DiscreteMeasure& f : factors_) acc = convolve_points(acc, f, max_points, anchor);
  return SubMeasure(dimension_, t_, family_, {std::move(acc)}, residual_, tolerance_);
}

// --- convolution -----------------------------------------------------------

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& k) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::int64_t v : k) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

struct Bin {
  double mass = 0.0;
  Vector moment;
  std::size_t order = 0;
};

/// Visits (location, mass) of every pair that involves at least one node.
template <class F>
void for_each_node_pair(const DiscreteMeasure& a, const DiscreteMeasure& b, F&& visit) {
  const int n = a.dimension();
  Vector loc(n);
  auto pairs = [&](const Eigen::MatrixXd& la, const Eigen::VectorXd& ma, const Eigen::MatrixXd& lb,
                   const Eigen::VectorXd& mb) {
    for (Eigen::Index i = 0; i < ma.size(); ++i) {
      for (Eigen::Index j = 0; j < mb.size(); ++j) {
        loc = la.col(i) + lb.col(j);
        visit(loc, ma[i] * mb[j]);
      }
    }
  };
  pairs(a.atom_locations, a.atom_masses, b.node_locations, b.node_weights);
  pairs(a.node_locations, a.node_weights, b.atom_locations, b.atom_masses);
  pairs(a.node_locations, a.node_weights, b.node_locations, b.node_weights);
}

std::int64_t bin_index(double v, double anchor, double per_decade) {
  if (v <= 0.0) return INT64_MIN;
  return static_cast<std::int64_t>(std::floor(std::log10(v / anchor) * per_decade));
}

}  // namespace

DiscreteMeasure convolve_points(const DiscreteMeasure& a, const DiscreteMeasure& b, std::size_t max_points,
                                double anchor) {
  if (a.dimension() != b.dimension()) {
    throw ShapeError(fmt::format("cannot convolve measures of dimension {} and {}", a.dimension(), b.dimension()));
  }
  const int n = a.dimension();
  DiscreteMeasure out = DiscreteMeasure::empty(n);

  // atom * atom, merging coincident locations
  std::map<std::vector<double>, double> atoms;
  std::vector<std::vector<double>> atom_order;
  for (Eigen::Index i = 0; i < a.atom_masses.size(); ++i) {
    for (Eigen::Index j = 0; j < b.atom_masses.size(); ++j) {
      const Vector loc = a.atom_locations.col(i) + b.atom_locations.col(j);
      std::vector<double> key(loc.data(), loc.data() + n);
      auto [it, inserted] = atoms.emplace(key, 0.0);
      if (inserted) atom_order.push_back(key);
      it->second += a.atom_masses[i] * b.atom_masses[j];
    }
  }
  out.atom_locations.resize(n, static_cast<Eigen::Index>(atom_order.size()));
  out.atom_masses.resize(static_cast<Eigen::Index>(atom_order.size()));
  for (std::size_t k = 0; k < atom_order.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    for (int j = 0; j < n; ++j) out.atom_locations(j, col) = atom_order[k][j];
    out.atom_masses[col] = atoms.at(atom_order[k]);
  }

  const std::size_t pair_count = static_cast<std::size_t>(a.atom_masses.size()) * b.node_weights.size() +
                                 static_cast<std::size_t>(a.node_weights.size()) * b.atom_masses.size() +
                                 static_cast<std::size_t>(a.node_weights.size()) * b.node_weights.size();
  const std::size_t node_budget = max_points > atom_order.size() ? max_points - atom_order.size() : 1;

  if (pair_count <= node_budget) {
    out.node_locations.resize(n, static_cast<Eigen::Index>(pair_count));
    out.node_weights.resize(static_cast<Eigen::Index>(pair_count));
    Eigen::Index k = 0;
    for_each_node_pair(a, b, [&](const Vector& loc, double mass) {
      out.node_locations.col(k) = loc;
      out.node_weights[k] = mass;
      ++k;
    });
    return out;
  }

  for (double per_decade = 2000.0; per_decade >= 1.0; per_decade /= 2.0) {
    std::unordered_map<std::vector<std::int64_t>, Bin, KeyHash> bins;
    bins.reserve(node_budget);
    std::vector<std::int64_t> key(n);
    bool overflow = false;
    for_each_node_pair(a, b, [&](const Vector& loc, double mass) {
      if (overflow) return;
      for (int j = 0; j < n; ++j) key[j] = bin_index(loc[j], anchor, per_decade);
      auto it = bins.find(key);
      if (it == bins.end()) {
        if (bins.size() >= node_budget) {
          overflow = true;
          return;
        }
        it = bins.emplace(key, Bin{0.0, Vector::Zero(n), bins.size()}).first;
      }
      it->second.mass += mass;
      it->second.moment += mass * loc;
    });
    if (overflow) continue;
    std::vector<const Bin*> ordered(bins.size());
    for (const auto& [k, bin] : bins) ordered[bin.order] = &bin;
    out.node_locations.resize(n, static_cast<Eigen::Index>(ordered.size()));
    out.node_weights.resize(static_cast<Eigen::Index>(ordered.size()));
    for (std::size_t k = 0; k < ordered.size(); ++k) {
      const auto col = static_cast<Eigen::Index>(k);
      out.node_weights[col] = ordered[k]->mass;
      out.node_locations.col(col) = ordered[k]->moment / ordered[k]->mass;
    }
    return out;
  }
  throw AccuracyError("convolution cannot be compressed into the point budget", 0.0);
}

SubMeasure convolve(const SubMeasure& a, const SubMeasure& b, const QuadratureScheme& quad) {
  if (a.dimension() != b.dimension()) {
    throw ShapeError(fmt::format("cannot convolve measures of dimension {} and {}", a.dimension(), b.dimension()));
  }
  const SubMeasure ma = a.materialized(quad.max_points);
  const SubMeasure mb = b.materialized(quad.max_points);
  DiscreteMeasure c = convolve_points(ma.factors()[0], mb.factors()[0], quad.max_points);
  // Certify against the product of the operands' transforms.
  double residual = 0.0;
  for (const Vector& s : quad.probe.points(a.dimension())) {
    residual = std::max(residual, std::abs(c.laplace(s) - ma.laplace(s) * mb.laplace(s)));
  }
  const std::string family = a.family() == b.family() ? a.family() : a.family() + "*" + b.family();
  return SubMeasure(a.dimension(), a.t() + b.t(), family, {std::move(c)},
                    a.residual() + b.residual() + residual, std::max(a.tolerance(), b.tolerance()));
}

// --- construction ----------------------------------------------------------

namespace {

/// One-dimensional measure in the ray parameter r, before push-forward.
struct RayMeasure {
  std::vector<double> atom_r;
  std::vector<double> atom_mass;
  std::vector<double> node_r;
  std::vector<double> node_weight;

  double laplace(double sigma) const {  // E exp(-sigma r)
    double v = 0.0;
    for (std::size_t i = 0; i < atom_r.size(); ++i) v += atom_mass[i] * std::exp(-sigma * atom_r[i]);
    for (std::size_t i = 0; i < node_r.size(); ++i) v += node_weight[i] * std::exp(-sigma * node_r[i]);
    return v;
  }
};

const StableDensity& stable_density(double alpha) {
  static std::mutex mutex;
  static std::map<double, std::unique_ptr<StableDensity>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[alpha];
  if (!slot) slot = std::make_unique<StableDensity>(alpha);
  return *slot;
}

/// Log-spaced GL panels on [lo, hi]; f receives (r, dy-weight * r).
template <class F>
void log_panels(double lo, double hi, double per_decade, int nodes, F&& f) {
  const GaussRule& rule = gauss_legendre(nodes);
  const int panels = std::max(1, static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade)));
  const double ylo = std::log(lo);
  const double width = (std::log(hi) - ylo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double center = ylo + (p + 0.5) * width;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double r = std::exp(center + 0.5 * width * rule.nodes[i]);
      f(r, 0.5 * width * rule.weights[i] * r);
    }
  }
}

struct SigmaRange {
  double lo;
  double hi;
};

RayMeasure stable_ray(double alpha, double tau, SigmaRange range, double per_decade, int nodes) {
  const StableDensity& sd = stable_density(alpha);
  const double scale = std::pow(tau, 1.0 / alpha);
  const double far_u = 60.0 / range.lo;
  const double x_hi = std::max(far_u / scale, 4.0);
  RayMeasure m;
  log_panels(sd.lower_cutoff(), x_hi, per_decade, nodes, [&](double x, double w) {
    const double weight = w * sd.density(x);
    if (weight > 0.0) {
      m.node_r.push_back(scale * x);
      m.node_weight.push_back(weight);
    }
  });
  m.node_r.push_back(scale * x_hi);
  m.node_weight.push_back(sd.tail(x_hi));
  return m;
}

RayMeasure gamma_ray(double shape, SigmaRange range, double per_decade, int nodes) {
  using boost::math::gamma_p;
  using boost::math::gamma_q;
  const double lo = 1e-12 / std::max(1.0, range.hi);
  const double hi = shape + 45.0 + 12.0 * std::sqrt(shape);
  const double log_norm = std::lgamma(shape);
  RayMeasure m;
  const double p_lo = gamma_p(shape, lo);
  if (p_lo > 0.0) {
    m.node_r.push_back(shape * gamma_p(shape + 1.0, lo) / p_lo);
    m.node_weight.push_back(p_lo);
  }
  log_panels(lo, hi, per_decade, nodes, [&](double r, double w) {
    const double weight = w * std::exp((shape - 1.0) * std::log(r) - r - log_norm);
    if (weight > 0.0) {
      m.node_r.push_back(r);
      m.node_weight.push_back(weight);
    }
  });
  const double q_hi = gamma_q(shape, hi);
  if (q_hi > 0.0) {
    m.node_r.push_back(shape * gamma_q(shape + 1.0, hi) / q_hi);
    m.node_weight.push_back(q_hi);
  }
  return m;
}

RayMeasure poisson_ray(double rate) {
  // Poisson(rate) on the lattice {0, 1, 2, ...}; stop once the dropped tail
  // P(N > K) is at most 1e-12.
  RayMeasure m;
  for (int k = 0;; ++k) {
    const double pmf = std::exp(k * std::log(rate) - rate - std::lgamma(k + 1.0));
    if (rate == 0.0 && k > 0) break;
    m.atom_r.push_back(k);
    m.atom_mass.push_back(rate == 0.0 ? 1.0 : pmf);
    if (rate == 0.0) break;
    if (boost::math::gamma_p(k + 1.0, rate) <= 1e-12) break;
  }
  return m;
}

DiscreteMeasure push_forward(const RayMeasure& m, const Vector& direction) {
  const int n = static_cast<int>(direction.size());
  DiscreteMeasure out = DiscreteMeasure::empty(n);
  out.atom_locations.resize(n, static_cast<Eigen::Index>(m.atom_r.size()));
  out.atom_masses.resize(static_cast<Eigen::Index>(m.atom_r.size()));
  for (std::size_t i = 0; i < m.atom_r.size(); ++i) {
    out.atom_locations.col(static_cast<Eigen::Index>(i)) = m.atom_r[i] * direction;
    out.atom_masses[static_cast<Eigen::Index>(i)] = m.atom_mass[i];
  }
  out.node_locations.resize(n, static_cast<Eigen::Index>(m.node_r.size()));
  out.node_weights.resize(static_cast<Eigen::Index>(m.node_r.size()));
  for (std::size_t i = 0; i < m.node_r.size(); ++i) {
    out.node_locations.col(static_cast<Eigen::Index>(i)) = m.node_r[i] * direction;
    out.node_weights[static_cast<Eigen::Index>(i)] = m.node_weight[i];
  }
  return out;
}

/// max |L(m)(sigma) - exact(sigma)| over sigma in {0} and a log grid of range.
template <class Exact>
double ray_residual(const RayMeasure& m, SigmaRange range, Exact&& exact) {
  double worst = std::abs(m.laplace(0.0) - exact(0.0));
  for (double sigma : log_space(range.lo, range.hi, 64)) {
    worst = std::max(worst, std::abs(m.laplace(sigma) - exact(sigma)));
  }
  return worst;
}

struct Factor {
  DiscreteMeasure points;
  double residual;
};

Factor build_factor(const RayTerm& term, double t, const QuadratureScheme& quad, double budget) {
  const BernsteinSpec& inner = *term.inner;
  const double tau = term.weight * t;
  const double scale = term.direction.lpNorm<1>();
  const SigmaRange range{quad.probe.lo * scale, quad.probe.hi * scale};
  const int nodes = quad.nodes_per_panel;

  switch (inner.family()) {
    case Family::Linear: {
      const double mass = std::exp(tau * inner.c0());
      return {DiscreteMeasure::unit_atom(tau * inner.c1()[0] * term.direction, mass), 0.0};
    }
    case Family::CompoundPoisson: {
      // one atom per elementary term: rate * (exp(jump s) - 1) with jump folded into direction
      const Atom& atom = inner.atoms().front();
      const double rate = tau * atom.weight;
      RayMeasure m = poisson_ray(rate);
      for (double& r : m.atom_r) r *= atom.location[0];
      const double jump = atom.location[0];
      const double res = ray_residual(m, range, [&](double sigma) { return std::exp(rate * std::expm1(-sigma * jump)); });
      return {push_forward(m, term.direction), res};
    }
    case Family::FractionalPower:
    case Family::Log: {
      double per_decade = quad.measure_panels_per_decade;
      double residual = 0.0;
      for (int attempt = 0; attempt <= quad.measure_refinements; ++attempt, per_decade *= 2.0) {
        RayMeasure m;
        if (inner.family() == Family::FractionalPower) {
          const double a = inner.alpha();
          m = stable_ray(a, tau, range, per_decade, nodes);
          residual = ray_residual(m, range, [&](double sigma) { return std::exp(-tau * std::pow(sigma, a)); });
        } else {
          m = gamma_ray(tau, range, per_decade, nodes);
          residual = ray_residual(m, range, [&](double sigma) { return std::exp(-tau * std::log1p(sigma)); });
        }
        if (residual <= budget) return {push_forward(m, term.direction), residual};
      }
      throw AccuracyError(fmt::format("subordination factor ({}) residual {:.3e} above budget {:.3e}",
                                      family_tag(inner.family()), residual, budget),
                          residual);
    }
    default:
      throw CapabilityError(fmt::format("no subordination construction for inner family {}",
                                        family_tag(inner.family())));
  }
}

}  // namespace

SubMeasure subordination_measure(const BernsteinSpec& spec, double t, const QuadratureScheme& quad) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("subordination time must be finite and nonnegative");
  const std::string family(family_tag(spec.family()));
  if (t == 0.0) return SubMeasure::unit_atom(spec.dimension(), family);
  std::vector<RayTerm> terms = spec.elementary_terms();
  std::erase_if(terms, [](const RayTerm& term) { return term.weight == 0.0; });
  if (terms.empty()) return SubMeasure::unit_atom(spec.dimension(), family);
  const double budget = quad.measure_tol / static_cast<double>(terms.size());
  std::vector<DiscreteMeasure> factors;
  double residual = 0.0;
  for (const RayTerm& term : terms) {
    Factor f = build_factor(term, t, quad, budget);
    residual += f.residual;
    factors.push_back(std::move(f.points));
  }
  // re-verify on the probe set against the product of the exact factor transforms
  for (const Vector& s : quad.probe.points(spec.dimension())) {
    double exact = 1.0;
    double approx = 1.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const Vector sigma = Vector::Constant(1, terms[i].direction.dot(s));
      exact *= std::exp(terms[i].weight * t * eval_psi_closure(*terms[i].inner, sigma));
      approx *= factors[i].laplace(s);
    }
    residual = std::max(residual, std::abs(approx - exact));
  }
  if (residual > quad.measure_tol) {
    throw AccuracyError(fmt::format("subordination measure residual {:.3e} above {:.3e}", residual, quad.measure_tol),
                        residual);
  }
  return SubMeasure(spec.dimension(), t, family, std::move(factors), residual, quad.measure_tol);
}

double laplace_transform(const SubMeasure& m, const Vector& s) {
  if (s.size() != m.dimension()) throw ShapeError("Laplace argument has the wrong dimension");
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (!(s[j] <= 0.0)) throw DomainError(fmt::format("Laplace transform needs s <= 0; s[{}] = {}", j, s[j]));
  }
  return m.laplace(s);
}

double levy_tail_mass(const LevyTriple& triple, double radius) {
  if (!(radius > 0.0)) throw DomainError("tail radius must be positive");
  double mass = 0.0;
  for (const Atom& a : triple.atoms()) {
    if (a.location.lpNorm<1>() > radius) mass += a.weight;
  }
  for (const RayDensity& d : triple.rays()) mass += d.tail_mass(radius / d.direction.lpNorm<1>());
  return mass;
}

double laplace_residual(const SubMeasure& m, const BernsteinSpec& spec, const ProbeSet& probe,
                        const QuadratureScheme& quad) {
  double worst = 0.0;
  for (const Vector& s : probe.points(m.dimension())) {
    const double exact = std::exp(m.t() * eval_psi_closure(spec, s, quad));
    worst = std::max(worst, std::abs(m.laplace(s) - exact));
  }
  return worst;
}

void write_csv(std::ostream& out, const SubMeasure& m, std::size_t max_points) {
  const SubMeasure flat = m.materialized(max_points);
  const DiscreteMeasure& f = flat.factors()[0];
  out << "# t=" << csv_number(m.t()) << ",family=" << m.family() << ",residual=" << csv_number(m.residual())
      << "\n";
  out << "kind";
  for (int j = 1; j <= m.dimension(); ++j) out << ",u_" << j;
  out << ",mass\n";
  auto rows = [&](const char* kind, const Eigen::MatrixXd& loc, const Eigen::VectorXd& mass) {
    for (Eigen::Index i = 0; i < mass.size(); ++i) {
      out << kind;
      for (Eigen::Index j = 0; j < loc.rows(); ++j) out << ',' << csv_number(loc(j, i));
      out << ',' << csv_number(mass[i]) << '\n';
    }
  };
  rows("atom", f.atom_locations, f.atom_masses);
  rows("node", f.node_locations, f.node_weights);
}

}  // namespace bpcalc
