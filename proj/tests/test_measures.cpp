#include <cmath>
#include <sstream>
#include <string>

#include <boost/math/special_functions/expint.hpp>
#include <gtest/gtest.h>

#include "bpcalc/errors.hpp"
#include "bpcalc/measures.hpp"
#include "support.hpp"

using namespace bpcalc;
using test::rvec;
using test::scalar;

namespace {

DiscreteMeasure flat(const SubMeasure& m) { return m.materialized(200000).factors()[0]; }

Eigen::VectorXd first_moment(const DiscreteMeasure& m) {
  Eigen::VectorXd v = m.atom_locations * m.atom_masses + m.node_locations * m.node_weights;
  return v;
}

}  // namespace

TEST(SubordinationMeasure, LogAtUnitTimeIsExponential) {
  const SubMeasure m = subordination_measure(BernsteinSpec::log(), 1.0);
  EXPECT_NEAR(laplace_transform(m, scalar(-1.0)), 0.5, 1e-10);
  EXPECT_NEAR(laplace_transform(m, scalar(-3.0)), 0.25, 1e-10);
  EXPECT_LE(m.residual(), 1e-10);
}

TEST(SubordinationMeasure, CompoundPoissonAtomsArePoissonWeights) {
  const SubMeasure m = subordination_measure(BernsteinSpec::compound_poisson(2.0, 1.0), 1.0);
  EXPECT_NEAR(laplace_transform(m, scalar(-1.0)), std::exp(2.0 * (std::exp(-1.0) - 1.0)), 1e-12);
  EXPECT_NEAR(laplace_transform(m, scalar(-1.0)), 0.2824536, 1e-7);
  const DiscreteMeasure f = flat(m);
  ASSERT_GE(f.atom_masses.size(), 6);
  EXPECT_EQ(f.node_weights.size(), 0);
  for (Eigen::Index i = 0; i < f.atom_masses.size(); ++i) {
    const double k = f.atom_locations(0, i);
    ASSERT_EQ(k, std::round(k));
    EXPECT_NEAR(f.atom_masses[i], std::exp(-2.0) * std::pow(2.0, k) / std::tgamma(k + 1.0), 1e-15);
  }
}

TEST(SubordinationMeasure, StableHalfMatchesLaplace) {
  const SubMeasure m = subordination_measure(BernsteinSpec::fractional_power(0.5), 1.0);
  EXPECT_NEAR(laplace_transform(m, scalar(-1.0)), std::exp(-1.0), 1e-10);
  EXPECT_NEAR(laplace_transform(m, scalar(-4.0)), std::exp(-2.0), 1e-10);
}

TEST(SubordinationMeasure, ZeroTimeIsUnitAtom) {
  for (const auto& spec : {BernsteinSpec::fractional_power(0.25), BernsteinSpec::log(2)}) {
    const SubMeasure m = subordination_measure(spec, 0.0);
    const DiscreteMeasure f = flat(m);
    ASSERT_EQ(f.atom_masses.size(), 1);
    EXPECT_EQ(f.node_weights.size(), 0);
    EXPECT_EQ(f.atom_masses[0], 1.0);
    EXPECT_TRUE(f.atom_locations.col(0).isZero());
  }
}

TEST(SubordinationMeasure, ResidualWithinToleranceForEveryFamily) {
  const QuadratureScheme quad;
  const auto mixed = BernsteinSpec::ray_sum(
      {{rvec({1.0, 0.0}), 0.5, share(BernsteinSpec::fractional_power(0.5))},
       {rvec({1.0, 2.0}), 1.0, share(BernsteinSpec::log())}});
  for (const auto& spec : {BernsteinSpec::fractional_power(0.25), BernsteinSpec::fractional_power(0.75),
                           BernsteinSpec::log(), BernsteinSpec::compound_poisson(2.0, 1.0), mixed}) {
    for (double t : {0.1, 1.0, 5.0}) {
      const SubMeasure m = subordination_measure(spec, t, quad);
      EXPECT_LE(m.residual(), quad.measure_tol) << family_tag(spec.family()) << " t=" << t;
      EXPECT_LE(laplace_residual(m, spec, quad.probe, quad), m.residual() + 1e-15)
          << family_tag(spec.family()) << " t=" << t;
    }
  }
}

TEST(SubordinationMeasure, MassBoundedByExpTC0) {
  const auto drifted = BernsteinSpec::linear(-1.0, rvec({0.5}));
  for (double t : {0.1, 1.0, 5.0}) {
    const SubMeasure m = subordination_measure(drifted, t);
    EXPECT_NEAR(m.total_mass(), std::exp(-t), 1e-14);
    const SubMeasure p = subordination_measure(BernsteinSpec::compound_poisson(2.0, 1.0), t);
    EXPECT_LE(p.total_mass(), 1.0 + 1e-12);
  }
}

TEST(SubordinationMeasure, LinearIsShiftedAtom) {
  const SubMeasure m = subordination_measure(BernsteinSpec::linear(0.0, rvec({2.0, 0.5})), 3.0);
  const DiscreteMeasure f = flat(m);
  ASSERT_EQ(f.atom_masses.size(), 1);
  EXPECT_NEAR(f.atom_locations(0, 0), 6.0, 1e-15);
  EXPECT_NEAR(f.atom_locations(1, 0), 1.5, 1e-15);
}

TEST(SubordinationMeasure, TransformIsCompletelyMonotone) {
  const SubMeasure m = subordination_measure(BernsteinSpec::fractional_power(0.75), 1.0);
  const std::vector<double> sigma = log_space(1e-2, 1e2, 41);
  for (std::size_t i = 0; i + 2 < sigma.size(); ++i) {
    const double h = sigma[i + 1] - sigma[i];
    const double l0 = laplace_transform(m, scalar(-sigma[i]));
    const double l1 = laplace_transform(m, scalar(-sigma[i] - h));
    const double l2 = laplace_transform(m, scalar(-sigma[i] - 2.0 * h));
    EXPECT_GE(l0 - l1, -1e-14);
    EXPECT_GE(l0 - 2.0 * l1 + l2, -1e-14);
  }
}

TEST(SubordinationMeasure, MassesArePositive) {
  const SubMeasure m = subordination_measure(BernsteinSpec::fractional_power(0.25, 2), 1.0);
  for (const DiscreteMeasure& f : m.factors()) {
    EXPECT_TRUE((f.atom_masses.array() >= 0.0).all());
    EXPECT_TRUE((f.node_weights.array() > 0.0).all());
    EXPECT_TRUE((f.node_locations.array() >= 0.0).all());
  }
}

TEST(SubordinationMeasure, RejectsNegativeTime) {
  EXPECT_THROW(subordination_measure(BernsteinSpec::log(), -1.0), DomainError);
}

TEST(LaplaceTransform, DomainAndShape) {
  const SubMeasure m = subordination_measure(BernsteinSpec::log(), 1.0);
  EXPECT_THROW(laplace_transform(m, scalar(0.5)), DomainError);
  EXPECT_THROW(laplace_transform(m, rvec({-1.0, -1.0})), ShapeError);
  EXPECT_NEAR(laplace_transform(m, scalar(0.0)), m.total_mass(), 0.0);
}

TEST(Convolution, UnitAtomIsIdentity) {
  const SubMeasure m = subordination_measure(BernsteinSpec::log(), 0.5);
  const SubMeasure c = convolve(SubMeasure::unit_atom(1), m);
  for (double s : {-0.1, -1.0, -10.0}) EXPECT_NEAR(c.laplace(scalar(s)), m.laplace(scalar(s)), 1e-15);
  EXPECT_EQ(flat(c).size(), flat(m).size());
}

TEST(Convolution, AtomsAddLocations) {
  const SubMeasure a(1, 0.0, "a", {DiscreteMeasure::unit_atom(scalar(1.0))}, 0.0, 0.0);
  const SubMeasure b(1, 0.0, "b", {DiscreteMeasure::unit_atom(scalar(2.0))}, 0.0, 0.0);
  const DiscreteMeasure c = flat(convolve(a, b));
  ASSERT_EQ(c.atom_masses.size(), 1);
  EXPECT_EQ(c.atom_locations(0, 0), 3.0);
  EXPECT_EQ(c.atom_masses[0], 1.0);
}

TEST(Convolution, GammaSemigroup) {
  const QuadratureScheme quad;
  const SubMeasure g1 = subordination_measure(BernsteinSpec::log(), 1.0, quad);
  const SubMeasure g2 = subordination_measure(BernsteinSpec::log(), 2.0, quad);
  const SubMeasure c = convolve(g1, g1, quad);
  EXPECT_LE(c.residual(), 2e-7);
  for (const Eigen::VectorXd& s : quad.probe.points(1)) {
    EXPECT_NEAR(c.laplace(s), g2.laplace(s), 2e-7) << s[0];
    EXPECT_NEAR(c.laplace(s), std::pow(1.0 - s[0], -2.0), 2e-7) << s[0];
  }
}

TEST(Convolution, CompressionKeepsMassAndFirstMoment) {
  const DiscreteMeasure a = flat(subordination_measure(BernsteinSpec::log(), 1.0));
  const DiscreteMeasure b = flat(subordination_measure(BernsteinSpec::fractional_power(0.5), 1.0));
  const DiscreteMeasure exact = convolve_points(a, b, a.size() * b.size() + 10);
  const DiscreteMeasure small = convolve_points(a, b, 500);
  EXPECT_LE(small.size(), 500u);
  EXPECT_NEAR(small.total_mass(), exact.total_mass(), 1e-13);
  EXPECT_NEAR(first_moment(small)[0], first_moment(exact)[0], 1e-11 * std::abs(first_moment(exact)[0]));
  EXPECT_THROW(convolve_points(a, DiscreteMeasure::unit_atom(rvec({0.0, 0.0})), 100), ShapeError);
}

TEST(LevyTail, Examples) {
  EXPECT_EQ(levy_tail_mass(BernsteinSpec::compound_poisson(2.0, 1.0).to_triple(), 1.0), 0.0);
  EXPECT_EQ(levy_tail_mass(BernsteinSpec::compound_poisson(2.0, 1.0).to_triple(), 0.5), 2.0);
  const double frac = levy_tail_mass(BernsteinSpec::fractional_power(0.5).to_triple(), 100.0);
  EXPECT_NEAR(frac, 1.0 / std::sqrt(M_PI * 100.0), 1e-12);
  EXPECT_NEAR(frac, 0.056419, 1e-6);
  const double gamma = levy_tail_mass(BernsteinSpec::log().to_triple(), 2.0);
  EXPECT_NEAR(gamma, boost::math::expint(1, 2.0), 1e-14);
  EXPECT_THROW(levy_tail_mass(BernsteinSpec::log().to_triple(), 0.0), DomainError);
}

TEST(MeasureCsv, Format) {
  const SubMeasure m = subordination_measure(BernsteinSpec::compound_poisson(2.0, 1.0), 1.0);
  std::ostringstream out;
  write_csv(out, m);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# t=1,family=cpoisson,residual=", 0), 0u) << line;
  std::getline(in, line);
  EXPECT_EQ(line, "kind,u_1,mass");
  std::getline(in, line);
  EXPECT_EQ(line, "atom,0,0.1353352832366127");
  double total = 0.0;
  total += 0.1353352832366127;
  while (std::getline(in, line)) total += std::stod(line.substr(line.rfind(',') + 1));
  EXPECT_NEAR(total, m.total_mass(), 1e-15);
}
