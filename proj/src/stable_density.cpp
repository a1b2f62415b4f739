#include "bpcalc/stable_density.hpp"

#include <cmath>
#include <numbers>

#include "bpcalc/errors.hpp"
#include "bpcalc/quadrature.hpp"

namespace bpcalc {

namespace {

constexpr double kPi = std::numbers::pi;
// panels whose integrand is below exp(-kCutExponent) of the peak are skipped
constexpr double kCutExponent = 60.0;

bool is_half(double alpha) { return alpha == 0.5; }

}  // namespace

double zolotarev_a(double alpha, double phi) {
  const double ratio = std::sin(alpha * phi) / std::sin(phi);
  return std::pow(ratio, 1.0 / (1.0 - alpha)) * std::sin((1.0 - alpha) * phi) /
         std::sin(alpha * phi);
}

StableDensity::StableDensity(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("stable index must lie in (0, 1)");
  const double a0 = std::pow(alpha, alpha / (1.0 - alpha)) * (1.0 - alpha);
  lower_cutoff_ = std::pow(a0 / 40.0, (1.0 - alpha) / alpha);
  a_min_ = a0;

  // panel ends phi_k with A(phi_k) = a0 2^{k/4}, by bisection on the increasing A
  std::vector<double> ends = {0.0};
  for (int k = 1;; ++k) {
    const double level = a0 * std::exp2(0.25 * k);
    double lo = ends.back();
    double hi = kPi;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * kPi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (zolotarev_a(alpha, mid) < level ? lo : hi) = mid;
    }
    ends.push_back(0.5 * (lo + hi));
    if (level > a0 + kCutExponent) break;
  }
  ends.push_back(kPi);
  const GaussRule& rule = gauss_legendre(16);
  for (std::size_t p = 0; p + 1 < ends.size(); ++p) {
    const double half = 0.5 * (ends[p + 1] - ends[p]);
    const double mid = 0.5 * (ends[p + 1] + ends[p]);
    panel_floor_.push_back(p == 0 ? a0 : zolotarev_a(alpha, ends[p]));
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      phi_weights_.push_back(half * rule.weights[i]);
      phi_values_.push_back(zolotarev_a(alpha, mid + half * rule.nodes[i]));
    }
  }
}

double StableDensity::zolotarev(double x) const {
  const double a = alpha_;
  const double c = std::pow(x, -a / (1.0 - a));
  double sum = 0.0;
  for (std::size_t p = 0; p < panel_floor_.size(); ++p) {
    if (c * (panel_floor_[p] - a_min_) > kCutExponent) break;
    for (std::size_t i = 16 * p; i < 16 * (p + 1); ++i) {
      const double v = phi_values_[i];
      sum += phi_weights_[i] * v * std::exp(-c * v);
    }
  }
  return a / (1.0 - a) / kPi * std::pow(x, -1.0 / (1.0 - a)) * sum;
}

double StableDensity::series_density(double x) const {
  // p(x) = (1/pi) sum_k (-1)^{k+1} Gamma(a k + 1)/k! sin(pi a k) x^{-a k - 1}
  const double a = alpha_;
  const double lx = std::log(x);
  double sum = 0.0;
  for (int k = 1; k < 400; ++k) {
    const double mag = std::exp(std::lgamma(a * k + 1.0) - std::lgamma(k + 1.0) - a * k * lx);
    const double term = mag * std::sin(kPi * a * k);
    sum += (k % 2 == 1) ? term : -term;
    if (k > 4 && mag < 1e-18 * std::abs(sum)) break;
  }
  return sum / (kPi * x);
}

double StableDensity::series_tail(double x) const {
  // P(X > x) = (1/pi) sum_k (-1)^{k+1} Gamma(a k)/k! sin(pi a k) x^{-a k}
  const double a = alpha_;
  const double lx = std::log(x);
  double sum = 0.0;
  for (int k = 1; k < 400; ++k) {
    const double mag = std::exp(std::lgamma(a * k) - std::lgamma(k + 1.0) - a * k * lx);
    const double term = mag * std::sin(kPi * a * k);
    sum += (k % 2 == 1) ? term : -term;
    if (k > 4 && mag < 1e-18 * std::abs(sum)) break;
  }
  return sum / kPi;
}

double StableDensity::density(double x) const {
  if (x <= 0.0) return 0.0;
  if (is_half(alpha_)) {
    return std::exp(-0.25 / x) / (2.0 * std::sqrt(kPi) * x * std::sqrt(x));
  }
  return x < 1.0 ? zolotarev(x) : series_density(x);
}

double StableDensity::tail(double x) const {
  if (x <= 0.0) return 1.0;
  if (is_half(alpha_)) return std::erf(0.5 / std::sqrt(x));
  if (x < 1.0) throw DomainError("stable tail series requires x >= 1");
  return series_tail(x);
}

}  // namespace bpcalc
