#include <cmath>

#include <gtest/gtest.h>

#include "bpcalc/calculus.hpp"
#include "bpcalc/errors.hpp"
#include "bpcalc/rng.hpp"
#include "support.hpp"

using namespace bpcalc;
using test::cvec;
using test::diag;
using test::rvec;

namespace {

void expect_close(const CVector& got, const CVector& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  EXPECT_LE((got - want).norm(), tol) << "got " << got.transpose() << "\nwant " << want.transpose();
}

CMatrix jordan() {
  CMatrix j = diag({-1.0, -1.0});
  j(0, 1) = 1.0;
  return j;
}

}  // namespace

TEST(LevyRoute, DriftIsGenerator) {
  const auto set = make_commuting_set({diag({-1.0, -4.0})});
  const Application r = apply_psi_levy(BernsteinSpec::linear(0.0, rvec({1.0})), set, cvec({1.0, 1.0}));
  expect_close(r.value, cvec({-1.0, -4.0}), 1e-15);
  EXPECT_EQ(r.error_bound, 0.0);
}

TEST(LevyRoute, FractionalHalfOnDiagonal) {
  const auto set = make_commuting_set({diag({-1.0, -4.0})});
  const Application r = apply_psi_levy(BernsteinSpec::fractional_power(0.5), set, cvec({1.0, 1.0}));
  expect_close(r.value, cvec({-1.0, -2.0}), 1e-7);
  EXPECT_LE(r.error_bound, 1e-8 * std::sqrt(2.0));
}

TEST(LevyRoute, CompoundPoissonIsExact) {
  const auto set = make_commuting_set({diag({-1.0, 0.0})});
  const Application r = apply_psi_levy(BernsteinSpec::compound_poisson(2.0, 1.0), set, cvec({1.0, 1.0}));
  expect_close(r.value, cvec({2.0 * std::expm1(-1.0), 0.0}), 1e-14);
  EXPECT_NEAR(r.value[0].real(), -1.264241, 1e-6);
}

TEST(LevyRoute, KernelDirectionContributesNothing) {
  const auto set = make_commuting_set({diag({0.0, 0.0})});
  const Application r = apply_psi_levy(BernsteinSpec::log(), set, cvec({1.0, 2.0}));
  EXPECT_EQ(r.value.norm(), 0.0);
}

TEST(LevyRoute, ShapeErrors) {
  const auto set = make_commuting_set({diag({-1.0, -4.0})});
  EXPECT_THROW(apply_psi_levy(BernsteinSpec::log(2), set, cvec({1.0, 1.0})), ShapeError);
  EXPECT_THROW(apply_psi_levy(BernsteinSpec::log(), set, cvec({1.0})), ShapeError);
}

TEST(GT, Examples) {
  const auto one = make_commuting_set({diag({-1.0})});
  expect_close(apply_g_t(BernsteinSpec::fractional_power(0.5), one, 1.0, cvec({1.0})).value,
               cvec({std::exp(-1.0)}), 1e-10);
  const auto two = make_commuting_set({diag({-1.0, -4.0})});
  expect_close(apply_g_t(BernsteinSpec::fractional_power(0.5), two, 1.0, cvec({1.0, 1.0})).value,
               cvec({std::exp(-1.0), std::exp(-2.0)}), 1e-10);
  expect_close(apply_g_t(BernsteinSpec::log(), two, 2.0, cvec({1.0, 1.0})).value, cvec({0.25, 0.04}), 1e-10);
  expect_close(apply_g_t(BernsteinSpec::log(), two, 0.0, cvec({3.0, 1.0})).value, cvec({3.0, 1.0}), 0.0);
  EXPECT_THROW(apply_g_t(BernsteinSpec::log(), two, -1.0, cvec({1.0, 1.0})), DomainError);
}

TEST(DifferenceRoute, RawQuotientAndExtrapolation) {
  const auto set = make_commuting_set({diag({-1.0, -4.0})});
  const auto frac = BernsteinSpec::fractional_power(0.5);
  const CVector x = cvec({1.0, 1.0});
  const auto lin = BernsteinSpec::linear(0.0, rvec({1.0}));
  const CVector raw = (apply_g_t(lin, set, 1e-3, x).value - x) / 1e-3;
  EXPECT_NEAR(raw[0].real(), std::expm1(-1e-3) / 1e-3, 1e-12);
  EXPECT_NEAR(raw[0].real(), -0.999500, 1e-6);
  const DifferenceResult r = generator_via_difference(frac, set, x);
  expect_close(r.value, cvec({-1.0, -2.0}), 1e-6);
  EXPECT_EQ(r.schedule, default_difference_schedule());
  EXPECT_TRUE(r.warning.empty()) << r.warning;
  EXPECT_NEAR(r.observed_order, 1.0, 0.2);
}

TEST(DifferenceRoute, ScheduleValidation) {
  const auto set = make_commuting_set({diag({-1.0})});
  const auto log = BernsteinSpec::log();
  EXPECT_THROW(generator_via_difference(log, set, cvec({1.0}), {0.1}), DomainError);
  EXPECT_THROW(generator_via_difference(log, set, cvec({1.0}), {0.1, 0.2}), DomainError);
  EXPECT_THROW(generator_via_difference(log, set, cvec({1.0}), {0.1, -0.05}), DomainError);
}

TEST(Spectral, Examples) {
  const auto set = make_commuting_set({diag({-1.0, -4.0})});
  expect_close(apply_psi_spectral(BernsteinSpec::fractional_power(0.5), set, cvec({1.0, 1.0})), cvec({-1.0, -2.0}),
               1e-15);
  expect_close(apply_psi_spectral(BernsteinSpec::log(), set, cvec({1.0, 0.0})), cvec({-std::log(2.0), 0.0}), 1e-15);
  const auto pair = make_commuting_set({diag({-1.0, -1.0}), diag({-3.0, -2.0})});
  expect_close(apply_psi_spectral(BernsteinSpec::fractional_power(0.5, 2), pair, cvec({1.0, 1.0})),
               cvec({-2.0, -std::sqrt(3.0)}), 1e-15);
  const auto sum = BernsteinSpec::ray_sum({{rvec({1.0, 1.0}), 1.0, share(BernsteinSpec::fractional_power(0.5))}});
  expect_close(apply_psi_spectral(sum, pair, cvec({1.0, 1.0})), cvec({-2.0, -std::sqrt(3.0)}), 1e-15);
}

TEST(Spectral, CapabilityAndDomain) {
  const auto frac = BernsteinSpec::fractional_power(0.5);
  EXPECT_THROW(apply_psi_spectral(frac, make_commuting_set({jordan()}), cvec({1.0, 1.0})), CapabilityError);
  EXPECT_THROW(apply_psi_spectral(frac, make_commuting_set({diag({1.0, -1.0})}), cvec({1.0, 1.0})), DomainError);
  CMatrix rot = CMatrix::Zero(2, 2);
  rot(0, 1) = 1.0;
  rot(1, 0) = -1.0;
  EXPECT_THROW(apply_psi_spectral(frac, make_commuting_set({rot}), cvec({1.0, 1.0})), DomainError);
}

TEST(Routes, LevyAgreesWithSpectralOnRandomHermitian) {
  Rng rng(21);
  CMatrix g = CMatrix::Zero(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) g(i, j) = rng.complex_normal();
  const CMatrix a = -(g * g.adjoint()) / 3.0;
  const auto set = make_commuting_set({a});
  CVector x(6);
  for (int i = 0; i < 6; ++i) x[i] = rng.complex_normal();
  for (const auto& spec : {BernsteinSpec::fractional_power(0.25), BernsteinSpec::fractional_power(0.75),
                           BernsteinSpec::log(), BernsteinSpec::compound_poisson(1.5, 0.3)}) {
    const CVector levy = apply_psi_levy(spec, set, x).value;
    const CVector spectral = apply_psi_spectral(spec, set, x);
    EXPECT_LE((levy - spectral).norm(), 1e-6 * x.norm()) << family_tag(spec.family());
  }
}

TEST(Routes, NonNormalMatchesJordanCalculus) {
  // f(J) for J = -I + N: f(-1) I + f'(-1) N; f(s) = -sqrt(-s), f'(-1) = 1/2
  const auto set = make_commuting_set({jordan()});
  ASSERT_FALSE(set.fast_basis());
  const auto frac = BernsteinSpec::fractional_power(0.5);
  const CVector want = cvec({0.5, -1.0});
  expect_close(apply_psi_levy(frac, set, cvec({0.0, 1.0})).value, want, 1e-6);
  expect_close(generator_via_difference(frac, set, cvec({0.0, 1.0})).value, want, 1e-5);
}

TEST(Routes, Linearity) {
  Rng rng(4);
  const CMatrix q = [&] {
    CMatrix g(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) = rng.complex_normal();
    Eigen::HouseholderQR<CMatrix> qr(g);
    return CMatrix(qr.householderQ() * CMatrix::Identity(3, 3));
  }();
  const auto set = make_commuting_set({q * diag({-0.5, -2.0, -8.0}) * q.adjoint()});
  const CVector x = cvec({1.0, -2.0, 0.5});
  const CVector y = cvec({0.0, 3.0, 1.0});
  const std::complex<double> a(0.7, -0.2);
  const auto log = BernsteinSpec::log();
  const CVector lhs = apply_psi_levy(log, set, a * x + y).value;
  const CVector rhs = a * apply_psi_levy(log, set, x).value + apply_psi_levy(log, set, y).value;
  // truncation adapts to each vector, so linearity holds to the route tolerance
  EXPECT_LE((lhs - rhs).norm(), 1e-8 * (std::abs(a) * x.norm() + y.norm()));
  const auto frac = BernsteinSpec::fractional_power(0.25);
  const auto combo = conic_combination(2.0, frac, 0.5, log);
  const CVector sum = 2.0 * apply_psi_levy(frac, set, x).value + 0.5 * apply_psi_levy(log, set, x).value;
  EXPECT_LE((apply_psi_levy(combo, set, x).value - sum).norm(), 1e-7 * x.norm());
  EXPECT_LE((apply_psi_spectral(combo, set, x) - sum).norm(), 1e-7 * x.norm());
}

TEST(Matrices, OperatorMatrixColumns) {
  const auto set = make_commuting_set({diag({-1.0, -4.0})});
  const CMatrix g = g_t_matrix(BernsteinSpec::fractional_power(0.5), set, 1.0);
  EXPECT_NEAR(std::abs(g(0, 0) - std::exp(-1.0)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(g(1, 1) - std::exp(-2.0)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(g(0, 1)), 0.0, 1e-15);
  const CMatrix p = psi_matrix_levy(BernsteinSpec::log(), set);
  EXPECT_NEAR(p(1, 1).real(), -std::log(5.0), 1e-7);
}
