#include <cmath>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <gtest/gtest.h>

#include "bpcalc/errors.hpp"
#include "bpcalc/quadrature.hpp"
#include "bpcalc/stable_density.hpp"

using namespace bpcalc;

namespace {

double levy_density(double x) { return std::exp(-1.0 / (4.0 * x)) / (2.0 * std::sqrt(M_PI) * std::pow(x, 1.5)); }

// alpha = 1/3: (1/(3 pi)) x^{-3/2} K_{1/3}(2 / (3 sqrt(3 x)))
double third_density(double x) {
  return std::pow(x, -1.5) / (3.0 * M_PI) *
         boost::math::cyl_bessel_k(1.0 / 3.0, 2.0 / (3.0 * std::sqrt(3.0 * x)));
}

// int_0^inf exp(-sigma x) p(x) dx by log-variable Gauss-Legendre panels.
template <class F>
double laplace(F&& p, double sigma, double lo) {
  const GaussRule& r = gauss_legendre(32);
  const double a = std::log(lo);
  const double b = std::log(200.0 / sigma);
  const int panels = 200;
  const double w = (b - a) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const double x = std::exp(a + (k + 0.5) * w + 0.5 * w * r.nodes[i]);
      sum += 0.5 * w * r.weights[i] * x * std::exp(-sigma * x) * p(x);
    }
  }
  return sum;
}

}  // namespace

TEST(StableDensity, HalfMatchesLevyClosedForm) {
  StableDensity sd(0.5);
  for (double x : {1e-3, 0.01, 0.1, 0.5, 1.0, 3.0, 100.0, 1e5}) {
    EXPECT_NEAR(sd.density(x), levy_density(x), 1e-13 * (1.0 + levy_density(x))) << x;
    EXPECT_NEAR(sd.tail(x), std::erf(1.0 / (2.0 * std::sqrt(x))), 1e-14) << x;
  }
}

TEST(StableDensity, ThirdMatchesBesselClosedForm) {
  StableDensity sd(1.0 / 3.0);
  for (double x : {0.005, 0.02, 0.1, 0.3, 0.9, 1.0, 1.5, 4.0, 50.0, 1e4}) {
    const double exact = third_density(x);
    EXPECT_NEAR(sd.density(x), exact, 1e-11 * exact + 1e-15) << x;
  }
}

TEST(StableDensity, ZolotarevBranchAgreesWithSeriesAtSwitch) {
  for (double a : {0.2, 0.3, 0.6, 0.75, 0.9}) {
    StableDensity sd(a);
    const double below = sd.density(std::nextafter(1.0, 0.0));
    const double at = sd.density(1.0);
    EXPECT_NEAR(below, at, 1e-11 * at) << a;
  }
}

TEST(StableDensity, LaplaceTransformIsStretchedExponential) {
  for (double a : {0.25, 0.5, 0.75}) {
    StableDensity sd(a);
    auto p = [&](double x) { return sd.density(x); };
    for (double sigma : {0.1, 1.0, 10.0}) {
      EXPECT_NEAR(laplace(p, sigma, sd.lower_cutoff()), std::exp(-std::pow(sigma, a)), 1e-10)
          << "alpha=" << a << " sigma=" << sigma;
    }
  }
}

TEST(StableDensity, SeriesTailMatchesIntegratedDensity) {
  StableDensity sd(0.75);
  // P(X > 2) = 1 - int_0^2 p
  const GaussRule& r = gauss_legendre(32);
  const double a = std::log(sd.lower_cutoff());
  const double b = std::log(2.0);
  const int panels = 100;
  const double w = (b - a) / panels;
  double mass = 0.0;
  for (int k = 0; k < panels; ++k) {
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const double x = std::exp(a + (k + 0.5) * w + 0.5 * w * r.nodes[i]);
      mass += 0.5 * w * r.weights[i] * x * sd.density(x);
    }
  }
  EXPECT_NEAR(sd.tail(2.0), 1.0 - mass, 1e-11);
}

TEST(StableDensity, TailBelowOneNeedsClosedForm) {
  StableDensity sd(0.3);
  EXPECT_THROW(sd.tail(0.5), DomainError);
  EXPECT_NO_THROW(StableDensity(0.5).tail(0.5));
}

TEST(StableDensity, DensityNegligibleBelowCutoff) {
  for (double a : {0.1, 0.25, 0.5, 0.9}) {
    StableDensity sd(a);
    const double x = sd.lower_cutoff();
    EXPECT_LT(sd.density(x) * x, 1e-15) << a;
  }
}

TEST(StableDensity, RejectsAlphaOutsideUnitInterval) {
  EXPECT_THROW(StableDensity(0.0), DomainError);
  EXPECT_THROW(StableDensity(1.0), DomainError);
}

TEST(ZolotarevA, KnownValueAtHalf) {
  // a = 1/2: A(phi) = (sin(phi/2) / sin(phi))^2
  const double phi = 1.1;
  const double expected = std::pow(std::sin(phi / 2) / std::sin(phi), 2.0);
  EXPECT_NEAR(zolotarev_a(0.5, phi), expected, 1e-15);
}
