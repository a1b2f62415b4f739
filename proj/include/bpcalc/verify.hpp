#pragma once

#include <cstdint>
#include <vector>

#include "bpcalc/bernstein.hpp"
#include "bpcalc/calculus.hpp"
#include "bpcalc/operators.hpp"
#include "bpcalc/quadrature.hpp"
#include "bpcalc/report.hpp"
#include "bpcalc/rng.hpp"

namespace bpcalc {

/// (M + 1) / (1 - exp(-(M + 1) / M)) for M >= 1.
double moment_constant(double m);

/// n commuting Hermitian matrices Q diag(lambda_j) Q^* of size d with a shared
/// random unitary Q and eigenvalues -exp(uniform) in [-hi, -lo].
CommutingGeneratorSet random_commuting_set(Rng& rng, int n, int d, double lo = 0.05, double hi = 20.0);

/// Complex Gaussian vector scaled to unit norm.
CVector random_unit_vector(Rng& rng, int d);

/// ||psi(A) x|| <= -C psi(-||Ax|| / ||x||) ||x|| for `samples` random unit x,
/// C = moment_constant(M) when M = 1 is certified and moment_constant(1.1 M)
/// otherwise. Requires one generator.
VerificationReport verify_moment_inequality(const BernsteinSpec& spec, const CommutingGeneratorSet& set, int samples,
                                            std::uint64_t seed, const QuadratureScheme& quad = {});

/// margin = budget ||x|| - ||difference route - Levy route|| for random x.
VerificationReport verify_generator_identity(const BernsteinSpec& spec, const CommutingGeneratorSet& set,
                                             int samples, std::uint64_t seed, double budget = 1e-5,
                                             const QuadratureScheme& quad = {});

struct HolomorphyOptions {
  /// Decreasing semigroup parameters used for b_j and delta.
  std::vector<double> t_grid = log_space(1.0, 1e-8, 33);
  /// Subordination times at which the norm bound and the mass bound are checked.
  std::vector<double> times = {1e-3, 1e-2, 1e-1, 1.0};
  /// Box size; 0 selects delta from t_grid.
  double delta = 0.0;
  /// Random u draws for the subadditivity section.
  int samples = 1000;
  std::uint64_t seed = 0;
};

/// Sections: "b" (sum of b_j < 2), "subadditivity", "bound" (2.1 for each
/// time), "mass-monotone" and "mass-laplace" (mass of nu_t outside the box).
/// The constant c0 of psi is dropped before the check.
VerificationReport verify_holomorphy_hypothesis(const CommutingGeneratorSet& set, const BernsteinSpec& spec,
                                                const HolomorphyOptions& options = {},
                                                const QuadratureScheme& quad = {});

/// Sections: "bounded" (||psi(A)|| <= |c0| + 2 M^n mu-mass over random
/// Hermitian negative semidefinite A), "scalar" (||psi(sI)|| = |psi(s)|),
/// "growth" (|psi(s)| increasing along s_grid) and "unbounded" (the last
/// value exceeds ten times the bound of the bounded function).
VerificationReport verify_corollary_10(const BernsteinSpec& spec_bounded, const BernsteinSpec& spec_unbounded,
                                       const std::vector<double>& s_grid, int samples, std::uint64_t seed,
                                       int d = 4, const QuadratureScheme& quad = {});

/// psi_k(s) = (exp(k s) - 1) / k for k = 1..n_max: ||psi_k(A) x|| <= (M + 1) / k ||x|| + tol
/// at every k for `x_samples` random x. Requires one generator.
VerificationReport verify_corollary_11(const CommutingGeneratorSet& set, int x_samples, int n_max,
                                       std::uint64_t seed, const QuadratureScheme& quad = {});

/// ||g_{t+r} x - g_t g_r x|| <= tol ||x|| with t, r log-uniform in [0.05, 2].
VerificationReport verify_semigroup_law(const BernsteinSpec& spec, const CommutingGeneratorSet& set, int samples,
                                        std::uint64_t seed, double tol = 2e-7, const QuadratureScheme& quad = {});

/// ||g_t(A)|| <= M^n + tol for every t.
VerificationReport verify_uniform_bound(const BernsteinSpec& spec, const CommutingGeneratorSet& set,
                                        const std::vector<double>& times, double tol = 1e-6,
                                        const QuadratureScheme& quad = {});

}  // namespace bpcalc
