#include "bpcalc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "bpcalc/errors.hpp"
#include "bpcalc/measures.hpp"

namespace bpcalc {

namespace {

void require_single(const CommutingGeneratorSet& set, const char* what) {
  if (set.n() != 1) throw ShapeError(fmt::format("{} needs exactly one generator, got {}", what, set.n()));
}

void require_dimension(const BernsteinSpec& spec, const CommutingGeneratorSet& set) {
  if (spec.dimension() != set.n()) {
    throw ShapeError(fmt::format("function of {} variables for {} generators", spec.dimension(), set.n()));
  }
}

BernsteinSpec without_constant(const BernsteinSpec& spec) {
  if (psi_limit_at_zero(spec) == 0.0) return spec;
  const LevyTriple t = spec.to_triple();
  return BernsteinSpec::triple(LevyTriple(0.0, t.c1(), t.atoms(), t.rays()));
}

double mn(const CommutingGeneratorSet& set) { return std::pow(set.m_bound(), set.n()); }

void common_params(VerificationReport& r, const CommutingGeneratorSet& set) {
  r.param("n", std::to_string(set.n()));
  r.param("d", std::to_string(set.d()));
  r.param("M_bound", set.m_bound());
  r.param("M_certified", set.m_certified() ? "yes" : "no (grid estimate)");
}

}  // namespace

double moment_constant(double m) {
  if (!(m >= 1.0)) throw DomainError(fmt::format("moment constant needs M >= 1, got {}", m));
  return (m + 1.0) / -std::expm1(-(m + 1.0) / m);
}

CommutingGeneratorSet random_commuting_set(Rng& rng, int n, int d, double lo, double hi) {
  if (n < 1 || d < 1) throw ShapeError("random set needs n >= 1 and d >= 1");
  CMatrix g(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) g(i, j) = rng.complex_normal();
  }
  const CMatrix q = Eigen::HouseholderQR<CMatrix>(g).householderQ();
  std::vector<CMatrix> mats;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd lambda(d);
    for (int i = 0; i < d; ++i) lambda[i] = -rng.log_uniform(lo, hi);
    CMatrix a = q * lambda.cast<std::complex<double>>().asDiagonal() * q.adjoint();
    mats.push_back(0.5 * (a + a.adjoint()));
  }
  return make_commuting_set(std::move(mats));
}

CVector random_unit_vector(Rng& rng, int d) {
  CVector x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.complex_normal();
  return x / x.norm();
}

VerificationReport verify_moment_inequality(const BernsteinSpec& spec, const CommutingGeneratorSet& set, int samples,
                                            std::uint64_t seed, const QuadratureScheme& quad) {
  require_single(set, "the moment inequality");
  require_dimension(spec, set);
  VerificationReport report("moment", seed);
  common_params(report, set);
  const double m_used = set.m_certified() ? 1.0 : 1.1 * set.m_bound();
  const double c = moment_constant(m_used);
  report.param("M_used", m_used);
  report.param("C_M", c);
  if (!set.m_certified()) report.note("M_bound is a grid estimate; the constant uses 1.1 * M_bound");
  const LevyTriple triple = spec.to_triple();
  Rng rng(seed);
  for (int i = 0; i < samples; ++i) {
    const CVector x = random_unit_vector(rng, set.d());
    const double ax = (set.matrix(0) * x).norm() / x.norm();
    if (!std::isfinite(ax)) {
      report.skip("moment", digest(x), "||Ax|| not finite");
      continue;
    }
    const double lhs = apply_psi_levy(triple, set, x, quad).value.norm();
    const double rhs = -c * eval_psi_closure(spec, Vector::Constant(1, -ax), quad) * x.norm();
    report.add("moment", digest(x), lhs, rhs);
  }
  return report;
}

VerificationReport verify_generator_identity(const BernsteinSpec& spec, const CommutingGeneratorSet& set,
                                             int samples, std::uint64_t seed, double budget,
                                             const QuadratureScheme& quad) {
  require_dimension(spec, set);
  VerificationReport report("generator", seed);
  common_params(report, set);
  report.param("budget", budget);
  const LevyTriple triple = spec.to_triple();
  Rng rng(seed);
  for (int i = 0; i < samples; ++i) {
    const CVector x = random_unit_vector(rng, set.d());
    const DifferenceResult diff = generator_via_difference(spec, set, x, default_difference_schedule(), quad);
    const CVector levy = apply_psi_levy(triple, set, x, quad).value;
    report.add("generator", digest(x), (diff.value - levy).norm(), budget * x.norm(),
               diff.warning.empty() ? fmt::format("order {:.2f}", diff.observed_order) : diff.warning);
  }
  return report;
}

VerificationReport verify_holomorphy_hypothesis(const CommutingGeneratorSet& set, const BernsteinSpec& spec,
                                                const HolomorphyOptions& options, const QuadratureScheme& quad) {
  require_dimension(spec, set);
  const std::vector<double>& grid = options.t_grid;
  if (grid.empty()) throw DomainError("holomorphy check needs a nonempty t grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] < grid[i - 1]))) {
      throw DomainError("holomorphy t grid must be positive and decreasing");
    }
  }
  VerificationReport report("holomorphy", options.seed);
  common_params(report, set);
  const int n = set.n();
  const BernsteinSpec psi = without_constant(spec);
  if (psi_limit_at_zero(spec) != 0.0) report.note("constant term c0 dropped");

  // (a) b_j from the smallest grid value
  std::vector<double> b(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) b[static_cast<std::size_t>(j)] = factor_deviation(set, j, grid.back());
  const double sum_b = std::accumulate(b.begin(), b.end(), 0.0);
  for (int j = 0; j < n; ++j) report.param(fmt::format("b_{}", j + 1), b[static_cast<std::size_t>(j)]);
  report.param("sum_b", sum_b);
  report.add("b", digest({grid.back()}), sum_b, 2.0, "sum of b_j < 2");

  // (b) subadditivity
  Rng rng(options.seed);
  {
    const Vector zero = Vector::Zero(n);
    report.add("subadditivity", digest(zero), deviation_from_identity(set, zero), 0.0);
  }
  for (int i = 0; i < options.samples; ++i) {
    Vector u(n);
    for (int j = 0; j < n; ++j) u[j] = rng.log_uniform(1e-3, 10.0);
    double rhs = 0.0;
    for (int j = 0; j < n; ++j) rhs += factor_deviation(set, j, u[j]);
    report.add("subadditivity", digest(u), deviation_from_identity(set, u), rhs);
  }

  const double eps = 0.1 * (2.0 - sum_b);
  report.param("epsilon", eps);
  if (!(eps > 0.0)) {
    report.note("sum of b_j >= 2: the norm bound is not checked");
    return report;
  }

  // delta: largest grid value below which every factor deviation stays under b_j + eps / n
  double delta_grid = grid.back();
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) ok = factor_deviation(set, j, *it) < b[static_cast<std::size_t>(j)] + eps / n;
    if (!ok) break;
    delta_grid = *it;
  }
  const double delta = options.delta > 0.0 ? options.delta : delta_grid;
  report.param("delta_grid", delta_grid);
  report.param("delta", delta);
  if (delta > delta_grid) report.note("supplied delta exceeds the grid delta; the norm bound is not implied there");

  // (c), (d)
  std::vector<double> times = options.times;
  std::sort(times.begin(), times.end());
  std::vector<double> outside_mass;
  const CMatrix id = CMatrix::Identity(set.d(), set.d());
  const Vector box_probe = Vector::Constant(n, -1.0 / delta);
  for (double t : times) {
    const SubMeasure nu = subordination_measure(psi, t, quad).materialized(quad.max_points, delta);
    const DiscreteMeasure& f = nu.factors()[0];
    double integral = 0.0;
    double mass = 0.0;
    auto visit = [&](const Eigen::MatrixXd& loc, const Eigen::VectorXd& w) {
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (loc.col(i).maxCoeff() < delta) continue;
        mass += w[i];
        integral += w[i] * deviation_from_identity(set, loc.col(i));
      }
    };
    visit(f.atom_locations, f.atom_masses);
    visit(f.node_locations, f.node_weights);
    outside_mass.push_back(mass);
    const double lhs = spectral_norm(id - g_t_matrix(psi, set, t, quad));
    report.add("bound", digest({t, delta}), lhs, sum_b + eps + integral, fmt::format("t={}", t));
    const double laplace_bound = -std::expm1(t * eval_psi(psi, box_probe, quad)) / -std::expm1(-1.0);
    report.add("mass-laplace", digest({t, delta}), mass, laplace_bound, fmt::format("t={}", t));
  }
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    report.add("mass-monotone", digest({times[i], times[i + 1]}), outside_mass[i], outside_mass[i + 1],
               fmt::format("t={} vs t={}", times[i], times[i + 1]));
  }
  return report;
}

VerificationReport verify_corollary_10(const BernsteinSpec& spec_bounded, const BernsteinSpec& spec_unbounded,
                                       const std::vector<double>& s_grid, int samples, std::uint64_t seed, int d,
                                       const QuadratureScheme& quad) {
  if (!is_bounded(spec_bounded)) throw DomainError("first function of corollary 10 must be bounded");
  if (is_bounded(spec_unbounded)) throw DomainError("second function of corollary 10 must be unbounded");
  VerificationReport report("corollary10", seed);
  const LevyTriple bt = spec_bounded.to_triple();
  const double mass = bt.atom_mass();
  report.param("mu_mass", mass);
  report.param("c0", bt.c0());
  Rng rng(seed);
  const int nb = spec_bounded.dimension();
  for (int i = 0; i < samples; ++i) {
    const CommutingGeneratorSet set = random_commuting_set(rng, nb, d, 1e-3, 1e3);
    const double norm = spectral_norm(psi_matrix_levy(spec_bounded, set, quad));
    const double bound = std::abs(bt.c0()) + 2.0 * mn(set) * mass;
    report.add("bounded", digest({static_cast<double>(i)}), norm, bound);
  }

  std::vector<double> grid = s_grid;
  std::sort(grid.begin(), grid.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  const int nu = spec_unbounded.dimension();
  std::vector<double> norms;
  for (double s : grid) {
    if (!(s < 0.0)) throw DomainError(fmt::format("corollary 10 grid values must be negative, got {}", s));
    std::vector<CMatrix> mats(static_cast<std::size_t>(nu), s * CMatrix::Identity(2, 2));
    const CommutingGeneratorSet set = make_commuting_set(std::move(mats));
    const double norm = spectral_norm(psi_matrix_levy(spec_unbounded, set, quad));
    const double scalar = std::abs(eval_psi(spec_unbounded, Vector::Constant(nu, s), quad));
    report.add("scalar", digest({s}), std::abs(norm - scalar), 1e-6 * (1.0 + scalar), fmt::format("s={}", s));
    norms.push_back(norm);
  }
  for (std::size_t i = 0; i + 1 < norms.size(); ++i) {
    report.add("growth", digest({grid[i], grid[i + 1]}), norms[i], norms[i + 1],
               fmt::format("s={} vs s={}", grid[i], grid[i + 1]));
  }
  if (!norms.empty()) {
    const double bound = std::abs(bt.c0()) + 2.0 * mass;
    report.add("unbounded", digest({grid.back()}), 10.0 * bound, norms.back(),
               fmt::format("||psi(sI)|| at s={} against ten times the bound {}", grid.back(), bound));
  }
  return report;
}

VerificationReport verify_corollary_11(const CommutingGeneratorSet& set, int x_samples, int n_max,
                                       std::uint64_t seed, const QuadratureScheme& quad) {
  require_single(set, "corollary 11");
  if (n_max < 4) throw DomainError("corollary 11 needs n_max >= 4");
  VerificationReport report("corollary11", seed);
  common_params(report, set);
  report.param("n_max", std::to_string(n_max));
  std::vector<LevyTriple> psi;
  for (int k = 1; k <= n_max; ++k) psi.push_back(BernsteinSpec::compound_poisson(1.0 / k, k).to_triple());
  Rng rng(seed);
  for (int i = 0; i < x_samples; ++i) {
    const CVector x = random_unit_vector(rng, set.d());
    for (int k = 1; k <= n_max; ++k) {
      const double lhs = apply_psi_levy(psi[static_cast<std::size_t>(k - 1)], set, x, quad).value.norm();
      const double rhs = (set.m_bound() + 1.0) / k * x.norm() + quad.tol;
      report.add("corollary11", digest(x), lhs, rhs, fmt::format("k={}", k));
    }
  }
  return report;
}

VerificationReport verify_semigroup_law(const BernsteinSpec& spec, const CommutingGeneratorSet& set, int samples,
                                        std::uint64_t seed, double tol, const QuadratureScheme& quad) {
  require_dimension(spec, set);
  VerificationReport report("semigroup", seed);
  common_params(report, set);
  report.param("tol", tol);
  Rng rng(seed);
  for (int i = 0; i < samples; ++i) {
    const double t = rng.log_uniform(0.05, 2.0);
    const double r = rng.log_uniform(0.05, 2.0);
    const CVector x = random_unit_vector(rng, set.d());
    const CVector lhs = apply_g_t(spec, set, t + r, x, quad).value;
    const CVector rhs = apply_g_t(spec, set, t, apply_g_t(spec, set, r, x, quad).value, quad).value;
    report.add("semigroup", digest({t, r}), (lhs - rhs).norm(), tol * x.norm(), fmt::format("t={} r={}", t, r));
  }
  return report;
}

VerificationReport verify_uniform_bound(const BernsteinSpec& spec, const CommutingGeneratorSet& set,
                                        const std::vector<double>& times, double tol, const QuadratureScheme& quad) {
  require_dimension(spec, set);
  VerificationReport report("uniform", 0);
  common_params(report, set);
  for (double t : times) {
    const double norm = spectral_norm(g_t_matrix(spec, set, t, quad));
    report.add("uniform", digest({t}), norm, mn(set) + tol, fmt::format("t={}", t));
  }
  return report;
}

}  // namespace bpcalc
