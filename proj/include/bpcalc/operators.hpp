#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace bpcalc {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// exp(A) by scaling and squaring with the degree-13 Pade approximant.
CMatrix expm(const CMatrix& a);

/// phi_1(A) x = sum_k A^k x / (k+1)!, read off exp([[A, x], [0, 0]]).
CVector phi1_apply(const CMatrix& a, const CVector& x);

/// Largest singular value.
double spectral_norm(const CMatrix& a);

/// Joint diagonalization V^{-1} A_j V = diag(eigenvalues.row(j)).
struct SharedEigenbasis {
  CMatrix vectors;
  CMatrix inverse;
  /// n x d; column k is the k-th joint eigenvalue tuple.
  CMatrix eigenvalues;
  bool unitary = false;
  /// 2-norm condition number of `vectors`.
  double condition = 1.0;
};

/// A tuple of pairwise commuting d x d matrices with the bound M on every
/// factor semigroup exp(t A_j).
class CommutingGeneratorSet {
 public:
  CommutingGeneratorSet(std::vector<CMatrix> matrices, double commutator_tol, double m_bound, bool m_certified,
                        std::optional<SharedEigenbasis> eigenbasis);

  int n() const noexcept { return static_cast<int>(matrices_.size()); }
  int d() const noexcept { return static_cast<int>(matrices_.front().rows()); }
  const std::vector<CMatrix>& matrices() const noexcept { return matrices_; }
  const CMatrix& matrix(int j) const { return matrices_.at(static_cast<std::size_t>(j)); }
  double commutator_tol() const noexcept { return commutator_tol_; }
  double m_bound() const noexcept { return m_bound_; }
  /// True when M = 1 is exact (every A_j Hermitian negative semidefinite).
  bool m_certified() const noexcept { return m_certified_; }
  const std::optional<SharedEigenbasis>& eigenbasis() const noexcept { return eigenbasis_; }
  /// Eigenbasis used for fast application (present and well conditioned).
  bool fast_basis() const noexcept;

  /// sum_j c_j A_j.
  CMatrix combination(const Eigen::VectorXd& c) const;

 private:
  std::vector<CMatrix> matrices_;
  double commutator_tol_;
  double m_bound_;
  bool m_certified_;
  std::optional<SharedEigenbasis> eigenbasis_;
};

/// 40 log-spaced t in [1e-3, 1e3].
std::vector<double> default_m_grid();

/// Validates commutators, estimates M and attempts a shared eigenbasis.
/// Throws ShapeError for non-square or mismatched input and CommutatorError
/// for the first offending pair.
CommutingGeneratorSet make_commuting_set(std::vector<CMatrix> matrices, double commutator_tol = 1e-10,
                                         const std::vector<double>& t_grid = default_m_grid());

/// T(u) x = exp(u_1 A_1) ... exp(u_n A_n) x.
CVector semigroup_apply(const CommutingGeneratorSet& set, const Eigen::VectorXd& u, const CVector& x);

/// (T(u) - I) x without cancellation for small u.
CVector semigroup_minus_identity(const CommutingGeneratorSet& set, const Eigen::VectorXd& u, const CVector& x);

/// T(u) as a matrix.
CMatrix semigroup_matrix(const CommutingGeneratorSet& set, const Eigen::VectorXd& u);

/// ||I - T(u)|| in the spectral norm.
double deviation_from_identity(const CommutingGeneratorSet& set, const Eigen::VectorXd& u);

/// ||I - T_j(t)||.
double factor_deviation(const CommutingGeneratorSet& set, int j, double t);

/// Row-major CSV of a complex matrix: each row holds re,im pairs for every
/// column, so a d x d matrix has 2d fields per line. Blank lines and lines
/// starting with '#' are skipped.
CMatrix read_matrix_csv(std::istream& in);
void write_matrix_csv(std::ostream& out, const CMatrix& a);

}  // namespace bpcalc
