#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bpcalc/bernstein.hpp"
#include "bpcalc/measures.hpp"
#include "bpcalc/operators.hpp"
#include "bpcalc/quadrature.hpp"

namespace bpcalc {

struct Application {
  CVector value;
  /// Certified part of the absolute error (truncations); quadrature error
  /// inside the panels is not included.
  double error_bound = 0.0;
};

/// psi(A) x = c0 x + sum_j c1_j A_j x + int (T(u) - I) x dmu(u), the integral
/// by log-panel quadrature along each ray of mu. Throws AccuracyError when a
/// far truncation cannot be certified below max_far_truncation.
Application apply_psi_levy(const LevyTriple& triple, const CommutingGeneratorSet& set, const CVector& x,
                           const QuadratureScheme& quad = {});
Application apply_psi_levy(const BernsteinSpec& spec, const CommutingGeneratorSet& set, const CVector& x,
                           const QuadratureScheme& quad = {});

/// int T(u) x dm(u) over the atoms and nodes of m.
Application apply_measure(const SubMeasure& m, const CommutingGeneratorSet& set, const CVector& x);

/// g_t(A) x = int T(u) x dnu_t(u). Measures are memoized per (spec, t, scheme).
Application apply_g_t(const BernsteinSpec& spec, const CommutingGeneratorSet& set, double t, const CVector& x,
                      const QuadratureScheme& quad = {});

/// 0.1 * 2^-k, k = 0..6.
std::vector<double> default_difference_schedule();

struct DifferenceResult {
  CVector value;
  std::vector<double> schedule;
  /// Estimated order p of the leading error term t^p of the raw quotients.
  double observed_order = 0.0;
  /// Norm of the last correction in the extrapolation table.
  double residual = 0.0;
  /// Empty unless the successive corrections failed to decrease.
  std::string warning;
};

/// Polynomial extrapolation to t = 0 of (g_t(A) x - x) / t along the schedule
/// (full Neville table).
DifferenceResult generator_via_difference(const BernsteinSpec& spec, const CommutingGeneratorSet& set,
                                          const CVector& x,
                                          const std::vector<double>& schedule = default_difference_schedule(),
                                          const QuadratureScheme& quad = {});

/// V diag(psi(lambda_k)) V^{-1} x over the joint eigenvalues. Throws
/// CapabilityError without an eigenbasis and DomainError when a joint
/// eigenvalue has a positive real part or an imaginary part.
CVector apply_psi_spectral(const BernsteinSpec& spec, const CommutingGeneratorSet& set, const CVector& x,
                           const QuadratureScheme& quad = {});

/// Matrix of a linear map on C^d, built column by column from unit vectors.
CMatrix operator_matrix(int d, const std::function<CVector(const CVector&)>& apply);

CMatrix psi_matrix_levy(const BernsteinSpec& spec, const CommutingGeneratorSet& set,
                        const QuadratureScheme& quad = {});
CMatrix g_t_matrix(const BernsteinSpec& spec, const CommutingGeneratorSet& set, double t,
                   const QuadratureScheme& quad = {});

}  // namespace bpcalc
