#pragma once

#include <vector>

namespace bpcalc {

/// Density of the one-sided alpha-stable law with Laplace transform
/// exp(-lambda^alpha), 0 < alpha < 1, at unit time.
///
/// For x < 1 the Zolotarev single-integral representation is evaluated on
/// panels in phi whose ends are where A(phi) crosses A(0) 2^{k/4}; A is
/// increasing, so the integrand exp(-c A) changes by a bounded factor per
/// panel whatever x is. For x >= 1 the convergent series in x^{-alpha} is
/// summed instead. alpha = 1/2 uses the Levy closed form throughout.
class StableDensity {
 public:
  explicit StableDensity(double alpha);

  double alpha() const noexcept { return alpha_; }
  double density(double x) const;
  /// P(X > x). Valid for x >= 1 (series) and for all x when alpha = 1/2.
  double tail(double x) const;
  /// Point below which the density is smaller than exp(-40) times its
  /// algebraic prefactor; mass to the left is negligible.
  double lower_cutoff() const noexcept { return lower_cutoff_; }

 private:
  double zolotarev(double x) const;
  double series_density(double x) const;
  double series_tail(double x) const;

  double alpha_;
  double lower_cutoff_;
  double a_min_;                     // A(0+)
  std::vector<double> panel_floor_;  // A at the left end of each panel
  std::vector<double> phi_weights_;  // 16 per panel
  std::vector<double> phi_values_;   // A(phi) at the nodes
};

/// Zolotarev's function A(phi) = [sin(a phi)^a sin((1-a) phi)^(1-a) / sin(phi)]^(1/(1-a)).
double zolotarev_a(double alpha, double phi);

}  // namespace bpcalc
