#include "bpcalc/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/core.h>

#include "bpcalc/errors.hpp"
#include "bpcalc/levy_quadrature.hpp"

namespace bpcalc {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

void require_direction(const Vector& c, const char* what) {
  if (c.size() == 0 || !all_finite(c) || (c.array() < 0.0).any() || !(c.array() > 0.0).any()) {
    throw DomainError(fmt::format("{}: direction must be nonnegative with a positive component", what));
  }
}

void require_strictly_negative(const Vector& s) {
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (!(s[j] < 0.0)) {
      throw DomainError(fmt::format("psi is defined on the open negative orthant; s[{}] = {}", j, s[j]));
    }
  }
}

void require_nonpositive(const Vector& s) {
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (!(s[j] <= 0.0)) throw DomainError(fmt::format("s[{}] = {} is positive", j, s[j]));
  }
}

Vector scalar(double v) { return Vector::Constant(1, v); }

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

// --- families --------------------------------------------------------------

std::string_view family_tag(Family family) {
  switch (family) {
    case Family::FractionalPower: return "frac";
    case Family::Log: return "log";
    case Family::CompoundPoisson: return "cpoisson";
    case Family::Linear: return "linear";
    case Family::Triple: return "triple";
    case Family::RaySum: return "raysum";
  }
  return "unknown";
}

Family family_from_tag(std::string_view tag) {
  static const std::map<std::string_view, Family> tags = {
      {"frac", Family::FractionalPower}, {"log", Family::Log},
      {"cpoisson", Family::CompoundPoisson}, {"linear", Family::Linear},
      {"triple", Family::Triple}, {"raysum", Family::RaySum}};
  auto it = tags.find(tag);
  if (it == tags.end()) throw DomainError(fmt::format("unknown family tag '{}'", tag));
  return it->second;
}

// --- ray densities ---------------------------------------------------------

double RayDensity::density(double r) const {
  if (r <= 0.0) return 0.0;
  switch (kind) {
    case DensityKind::Stable:
      return weight * alpha / std::tgamma(1.0 - alpha) * std::pow(r, -1.0 - alpha);
    case DensityKind::Gamma:
      return weight * std::exp(-r) / r;
  }
  return 0.0;
}

double RayDensity::tail_mass(double r) const {
  if (r <= 0.0) return std::numeric_limits<double>::infinity();
  switch (kind) {
    case DensityKind::Stable:
      return weight * std::pow(r, -alpha) / std::tgamma(1.0 - alpha);
    case DensityKind::Gamma:
      return weight * -std::expint(-r);  // E1(r)
  }
  return 0.0;
}

double RayDensity::first_moment(double eps) const {
  if (eps <= 0.0) return 0.0;
  switch (kind) {
    case DensityKind::Stable:
      return weight * alpha / ((1.0 - alpha) * std::tgamma(1.0 - alpha)) * std::pow(eps, 1.0 - alpha);
    case DensityKind::Gamma:
      return -weight * std::expm1(-eps);
  }
  return 0.0;
}

double RayDensity::psi(double sigma) const {
  switch (kind) {
    case DensityKind::Stable: return -weight * std::pow(-sigma, alpha);
    case DensityKind::Gamma: return -weight * std::log1p(-sigma);
  }
  return 0.0;
}

// --- triples ---------------------------------------------------------------

LevyTriple::LevyTriple(double c0, Vector c1, std::vector<Atom> atoms, std::vector<RayDensity> rays)
    : c0_(c0), c1_(std::move(c1)), atoms_(std::move(atoms)), rays_(std::move(rays)) {
  if (c1_.size() == 0) throw ShapeError("Levy triple needs a drift vector of positive dimension");
  if (!(std::isfinite(c0_) && c0_ <= 0.0)) throw DomainError("c0 must be a finite nonpositive number");
  if (!all_finite(c1_) || (c1_.array() < 0.0).any()) throw DomainError("drift c1 must be nonnegative");
  for (const Atom& a : atoms_) {
    if (a.location.size() != c1_.size()) throw ShapeError("atom dimension differs from drift dimension");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw DomainError("atom weights must be positive");
    if (!all_finite(a.location) || (a.location.array() < 0.0).any()) {
      throw DomainError("atom locations must lie in the nonnegative orthant");
    }
    if (!(a.location.array() > 0.0).any()) throw DomainError("Levy measure cannot charge the origin");
  }
  for (const RayDensity& d : rays_) {
    if (d.direction.size() != c1_.size()) throw ShapeError("ray dimension differs from drift dimension");
    require_direction(d.direction, "ray density");
    if (!(d.weight > 0.0) || !std::isfinite(d.weight)) throw DomainError("ray density weight must be positive");
    if (d.kind == DensityKind::Stable && !(d.alpha > 0.0 && d.alpha < 1.0)) {
      throw DomainError("stable ray density needs alpha in (0, 1)");
    }
  }
}

double LevyTriple::atom_mass() const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.weight;
  return m;
}

double LevyTriple::integrability() const {
  double total = 0.0;
  for (const Atom& a : atoms_) total += a.weight * std::min(1.0, a.location.lpNorm<1>());
  for (const RayDensity& d : rays_) {
    const double scale = d.direction.lpNorm<1>();
    const double cut = 1.0 / scale;
    total += scale * d.first_moment(cut) + d.tail_mass(cut);
  }
  return total;
}

// --- specs -----------------------------------------------------------------

std::shared_ptr<const BernsteinSpec> share(BernsteinSpec spec) {
  return std::make_shared<const BernsteinSpec>(std::move(spec));
}

BernsteinSpec BernsteinSpec::fractional_power(double alpha, int dimension) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("fractional power needs 0 < alpha < 1");
  if (dimension < 1) throw ShapeError("dimension must be positive");
  BernsteinSpec s;
  s.family_ = Family::FractionalPower;
  s.dimension_ = dimension;
  s.alpha_ = alpha;
  return s;
}

BernsteinSpec BernsteinSpec::log(int dimension) {
  if (dimension < 1) throw ShapeError("dimension must be positive");
  BernsteinSpec s;
  s.family_ = Family::Log;
  s.dimension_ = dimension;
  return s;
}

BernsteinSpec BernsteinSpec::compound_poisson(std::vector<Atom> atoms) {
  if (atoms.empty()) throw DomainError("compound Poisson family needs at least one atom");
  const auto n = atoms.front().location.size();
  // reuse the triple validation
  LevyTriple check(0.0, Vector::Zero(n), atoms);
  BernsteinSpec s;
  s.family_ = Family::CompoundPoisson;
  s.dimension_ = static_cast<int>(n);
  s.atoms_ = std::move(atoms);
  return s;
}

BernsteinSpec BernsteinSpec::compound_poisson(double rate, double jump) {
  return compound_poisson({Atom{scalar(jump), rate}});
}

BernsteinSpec BernsteinSpec::linear(double c0, Vector c1) {
  LevyTriple check(c0, c1);
  BernsteinSpec s;
  s.family_ = Family::Linear;
  s.dimension_ = static_cast<int>(c1.size());
  s.c0_ = c0;
  s.c1_ = std::move(c1);
  return s;
}

BernsteinSpec BernsteinSpec::triple(LevyTriple triple) {
  BernsteinSpec s;
  s.family_ = Family::Triple;
  s.dimension_ = triple.dimension();
  s.triple_ = std::make_shared<const LevyTriple>(std::move(triple));
  return s;
}

BernsteinSpec BernsteinSpec::ray_sum(std::vector<RayTerm> terms) {
  if (terms.empty()) throw DomainError("ray sum needs at least one term");
  const auto n = terms.front().direction.size();
  for (const RayTerm& t : terms) {
    if (t.direction.size() != n) throw ShapeError("ray sum directions differ in dimension");
    require_direction(t.direction, "ray sum");
    if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) throw DomainError("ray weights must be nonnegative");
    if (!t.inner) throw DomainError("ray sum term without inner function");
    if (t.inner->dimension() != 1) throw ShapeError("ray sum inner functions must be one-dimensional");
  }
  BernsteinSpec s;
  s.family_ = Family::RaySum;
  s.dimension_ = static_cast<int>(n);
  s.terms_ = std::move(terms);
  return s;
}

double BernsteinSpec::alpha() const {
  if (family_ != Family::FractionalPower) throw CapabilityError("alpha is defined for the fractional power only");
  return alpha_;
}

const std::vector<Atom>& BernsteinSpec::atoms() const {
  if (family_ != Family::CompoundPoisson) throw CapabilityError("atoms are defined for compound Poisson only");
  return atoms_;
}

double BernsteinSpec::c0() const {
  if (family_ != Family::Linear) throw CapabilityError("c0 accessor is for the linear family");
  return c0_;
}

const Vector& BernsteinSpec::c1() const {
  if (family_ != Family::Linear) throw CapabilityError("c1 accessor is for the linear family");
  return c1_;
}

const LevyTriple& BernsteinSpec::levy_triple() const {
  if (family_ != Family::Triple) throw CapabilityError("not a triple");
  return *triple_;
}

const std::vector<RayTerm>& BernsteinSpec::terms() const {
  if (family_ != Family::RaySum) throw CapabilityError("not a ray sum");
  return terms_;
}

std::vector<RayTerm> BernsteinSpec::elementary_terms() const {
  const Vector ones = Vector::Ones(dimension_);
  std::vector<RayTerm> out;
  switch (family_) {
    case Family::FractionalPower:
      out.push_back({ones, 1.0, share(fractional_power(alpha_))});
      break;
    case Family::Log:
      out.push_back({ones, 1.0, share(log())});
      break;
    case Family::CompoundPoisson:
      for (const Atom& a : atoms_) out.push_back({a.location, 1.0, share(compound_poisson(a.weight, 1.0))});
      break;
    case Family::Linear: {
      if ((c1_.array() > 0.0).any()) {
        out.push_back({c1_, 1.0, share(linear(c0_, scalar(1.0)))});
      } else {
        out.push_back({Vector::Unit(dimension_, 0), 1.0, share(linear(c0_, scalar(0.0)))});
      }
      break;
    }
    case Family::Triple: {
      const LevyTriple& t = *triple_;
      if (t.c0() != 0.0 || (t.c1().array() > 0.0).any()) {
        for (const RayTerm& r : linear(t.c0(), t.c1()).elementary_terms()) out.push_back(r);
      }
      for (const Atom& a : t.atoms()) out.push_back({a.location, 1.0, share(compound_poisson(a.weight, 1.0))});
      for (const RayDensity& d : t.rays()) {
        if (d.kind == DensityKind::Stable) {
          out.push_back({d.direction, d.weight, share(fractional_power(d.alpha))});
        } else {
          out.push_back({d.direction, d.weight, share(log())});
        }
      }
      if (out.empty()) out.push_back({Vector::Unit(dimension_, 0), 1.0, share(linear(0.0, scalar(0.0)))});
      break;
    }
    case Family::RaySum:
      for (const RayTerm& term : terms_) {
        if (term.weight == 0.0) continue;
        for (const RayTerm& e : term.inner->elementary_terms()) {
          // inner terms are one-dimensional: their direction is a positive scalar
          out.push_back({term.direction * e.direction[0], term.weight * e.weight, e.inner});
        }
      }
      if (out.empty()) out.push_back({Vector::Unit(dimension_, 0), 1.0, share(linear(0.0, scalar(0.0)))});
      break;
  }
  return out;
}

LevyTriple BernsteinSpec::to_triple() const {
  if (family_ == Family::Triple) return *triple_;
  double c0 = 0.0;
  Vector c1 = Vector::Zero(dimension_);
  std::vector<Atom> atoms;
  std::vector<RayDensity> rays;
  for (const RayTerm& e : elementary_terms()) {
    if (e.weight == 0.0) continue;
    const BernsteinSpec& f = *e.inner;
    switch (f.family()) {
      case Family::FractionalPower:
        rays.push_back({e.direction, DensityKind::Stable, f.alpha(), e.weight});
        break;
      case Family::Log:
        rays.push_back({e.direction, DensityKind::Gamma, 0.0, e.weight});
        break;
      case Family::CompoundPoisson:
        for (const Atom& a : f.atoms()) atoms.push_back({e.direction * a.location[0], e.weight * a.weight});
        break;
      case Family::Linear:
        c0 += e.weight * f.c0();
        c1 += e.weight * f.c1()[0] * e.direction;
        break;
      default:
        throw CapabilityError("unexpected elementary term");
    }
  }
  return LevyTriple(c0, std::move(c1), std::move(atoms), std::move(rays));
}

// --- evaluation ------------------------------------------------------------

double eval_psi_closure(const BernsteinSpec& spec, const Vector& s, const QuadratureScheme& quad) {
  if (s.size() != spec.dimension()) {
    throw ShapeError(fmt::format("argument has dimension {}, function has {}", s.size(), spec.dimension()));
  }
  require_nonpositive(s);
  switch (spec.family()) {
    case Family::FractionalPower:
      return -std::pow(-s.sum(), spec.alpha());
    case Family::Log:
      return -std::log1p(-s.sum());
    case Family::CompoundPoisson: {
      double v = 0.0;
      for (const Atom& a : spec.atoms()) v += a.weight * std::expm1(s.dot(a.location));
      return v;
    }
    case Family::Linear:
      return spec.c0() + spec.c1().dot(s);
    case Family::Triple: {
      const LevyTriple& t = spec.levy_triple();
      double v = t.c0() + t.c1().dot(s);
      for (const Atom& a : t.atoms()) v += a.weight * std::expm1(s.dot(a.location));
      for (const RayDensity& d : t.rays()) v += ray_integral(d, d.direction.dot(s), quad);
      return v;
    }
    case Family::RaySum: {
      double v = 0.0;
      for (const RayTerm& term : spec.terms()) {
        if (term.weight == 0.0) continue;
        v += term.weight * eval_psi_closure(*term.inner, scalar(term.direction.dot(s)), quad);
      }
      return v;
    }
  }
  return 0.0;
}

double eval_psi(const BernsteinSpec& spec, const Vector& s, const QuadratureScheme& quad) {
  if (s.size() != spec.dimension()) {
    throw ShapeError(fmt::format("argument has dimension {}, function has {}", s.size(), spec.dimension()));
  }
  require_strictly_negative(s);
  return eval_psi_closure(spec, s, quad);
}

double psi_limit_at_zero(const BernsteinSpec& spec) {
  switch (spec.family()) {
    case Family::FractionalPower:
    case Family::Log:
    case Family::CompoundPoisson:
      return 0.0;
    case Family::Linear:
      return spec.c0();
    case Family::Triple:
      return spec.levy_triple().c0();
    case Family::RaySum: {
      double v = 0.0;
      for (const RayTerm& t : spec.terms()) v += t.weight * psi_limit_at_zero(*t.inner);
      return v;
    }
  }
  return 0.0;
}

BernsteinSpec conic_combination(double a, const BernsteinSpec& psi1, double b, const BernsteinSpec& psi2) {
  if (!(a >= 0.0 && b >= 0.0)) throw DomainError("conic combination needs nonnegative coefficients");
  if (psi1.dimension() != psi2.dimension()) throw ShapeError("conic combination of different dimensions");
  std::vector<RayTerm> terms;
  auto append = [&terms](double scale, const BernsteinSpec& f) {
    if (scale == 0.0) return;
    for (RayTerm t : f.elementary_terms()) {
      t.weight *= scale;
      terms.push_back(std::move(t));
    }
  };
  append(a, psi1);
  append(b, psi2);
  if (terms.empty()) return BernsteinSpec::linear(0.0, Vector::Zero(psi1.dimension()));
  return BernsteinSpec::ray_sum(std::move(terms));
}

bool is_bounded(const BernsteinSpec& spec) {
  const LevyTriple t = spec.to_triple();
  return t.rays().empty() && !(t.c1().array() > 0.0).any();
}

// --- membership ------------------------------------------------------------

std::vector<Vector> log_grid(int dimension, double lo, double hi, int per_coordinate) {
  ProbeSet p{per_coordinate, lo, hi};
  return p.points(dimension);
}

namespace {

/// All multi-indices of length n with |beta| <= order, in a fixed order.
std::vector<std::vector<int>> multi_indices(int n, int order) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(n, 0);
  while (true) {
    int total = 0;
    for (int v : idx) total += v;
    if (total <= order) out.push_back(idx);
    int j = 0;
    while (j < n && ++idx[j] > order) idx[j++] = 0;
    if (j == n) break;
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    int sx = 0, sy = 0;
    for (int v : x) sx += v;
    for (int v : y) sy += v;
    return sx < sy;
  });
  return out;
}

}  // namespace

MembershipReport check_membership(const std::function<double(const Vector&)>& psi, int dimension,
                                  const std::vector<Vector>& grid, int max_order) {
  if (max_order < 2) throw DomainError("membership check needs max_order >= 2");
  for (const Vector& s : grid) {
    if (s.size() != dimension) throw ShapeError("grid point of wrong dimension");
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (!(s[j] < 0.0)) throw DomainError("membership grid must lie inside the open negative orthant");
    }
  }
  const auto stencil = multi_indices(dimension, max_order);
  std::map<std::vector<int>, std::size_t> position;
  for (std::size_t i = 0; i < stencil.size(); ++i) position[stencil[i]] = i;

  MembershipReport report;
  report.max_psi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < stencil.size(); ++i) {
    MembershipEntry e;
    e.multi_index = stencil[i];
    e.min_estimate = std::numeric_limits<double>::infinity();
    e.worst_margin = std::numeric_limits<double>::infinity();
    report.entries.push_back(std::move(e));
  }

  std::vector<double> values(stencil.size());
  for (const Vector& s : grid) {
    const Vector h = 0.05 * s.cwiseAbs();
    for (std::size_t i = 0; i < stencil.size(); ++i) {
      Vector p = s;
      for (int j = 0; j < dimension; ++j) p[j] += stencil[i][j] * h[j];
      values[i] = psi(p);
    }
    const double base = values[0];
    report.max_psi = std::max(report.max_psi, base);
    const double tol = 1e-6 * (1.0 + std::abs(base));
    for (std::size_t i = 1; i < stencil.size(); ++i) {
      const std::vector<int>& alpha = stencil[i];
      // forward difference: sum over beta <= alpha
      double diff = 0.0;
      std::vector<int> beta(dimension, 0);
      while (true) {
        double coeff = 1.0;
        int parity = 0;
        for (int j = 0; j < dimension; ++j) {
          coeff *= binomial(alpha[j], beta[j]);
          parity += alpha[j] - beta[j];
        }
        diff += (parity % 2 == 0 ? coeff : -coeff) * values[position.at(beta)];
        int j = 0;
        while (j < dimension && ++beta[j] > alpha[j]) beta[j++] = 0;
        if (j == dimension) break;
      }
      double scale = 1.0;
      for (int j = 0; j < dimension; ++j) scale *= std::pow(h[j], alpha[j]);
      MembershipEntry& e = report.entries[i - 1];
      e.min_estimate = std::min(e.min_estimate, diff / scale);
      const double margin = diff + tol;
      if (margin < e.worst_margin) {
        e.worst_margin = margin;
        e.worst_point = s;
      }
      if (margin < 0.0) e.ok = false;
    }
  }
  report.nonpositive = report.max_psi <= 0.0;
  report.pass = report.nonpositive;
  for (const MembershipEntry& e : report.entries) {
    if (!e.ok) {
      report.pass = false;
      int order = 0;
      for (int v : e.multi_index) order += v;
      if (report.first_failing_order == 0 || order < report.first_failing_order) report.first_failing_order = order;
    }
  }
  return report;
}

MembershipReport check_membership(const BernsteinSpec& spec, const std::vector<Vector>& grid, int max_order,
                                  const QuadratureScheme& quad) {
  return check_membership([&](const Vector& s) { return eval_psi(spec, s, quad); }, spec.dimension(), grid,
                          max_order);
}

}  // namespace bpcalc
