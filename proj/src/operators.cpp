#include "bpcalc/operators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "bpcalc/csv.hpp"
#include "bpcalc/errors.hpp"
#include "bpcalc/quadrature.hpp"
#include "bpcalc/rng.hpp"

namespace bpcalc {

namespace {

using cd = std::complex<double>;

cd complex_expm1(cd z) {
  const double a = z.real();
  const double b = z.imag();
  if (b == 0.0) return {std::expm1(a), 0.0};
  const double sh = std::sin(0.5 * b);
  return {std::expm1(a) * std::cos(b) - 2.0 * sh * sh, std::exp(a) * std::sin(b)};
}

bool is_diagonal(const CMatrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j && a(i, j) != cd(0.0)) return false;
    }
  }
  return true;
}

bool is_hermitian(const CMatrix& a, double norm) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + norm);
}

double max_offdiagonal(const CMatrix& a) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) worst = std::max(worst, std::abs(a(i, j)));
    }
  }
  return worst;
}

/// Checks V^{-1} A_j V for every j and fills the eigenvalue table.
std::optional<SharedEigenbasis> accept_basis(const std::vector<CMatrix>& mats, const std::vector<double>& norms,
                                             CMatrix vectors, CMatrix inverse, bool unitary) {
  const auto n = static_cast<Eigen::Index>(mats.size());
  const Eigen::Index d = mats.front().rows();
  SharedEigenbasis basis;
  basis.eigenvalues.resize(n, d);
  for (Eigen::Index j = 0; j < n; ++j) {
    const CMatrix diag = inverse * mats[static_cast<std::size_t>(j)] * vectors;
    if (max_offdiagonal(diag) > 1e-8 * (1.0 + norms[static_cast<std::size_t>(j)])) return std::nullopt;
    basis.eigenvalues.row(j) = diag.diagonal().transpose();
  }
  basis.unitary = unitary;
  if (unitary) {
    basis.condition = 1.0;
  } else {
    Eigen::JacobiSVD<CMatrix> svd(vectors);
    const auto& sv = svd.singularValues();
    basis.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    // defective matrices pass the diagonality check with nearly parallel eigenvectors
    if (!(basis.condition <= 1e8)) return std::nullopt;
  }
  basis.vectors = std::move(vectors);
  basis.inverse = std::move(inverse);
  return basis;
}

std::optional<SharedEigenbasis> find_eigenbasis(const std::vector<CMatrix>& mats, const std::vector<double>& norms,
                                                bool hermitian) {
  const Eigen::Index d = mats.front().rows();
  if (std::all_of(mats.begin(), mats.end(), is_diagonal)) {
    return accept_basis(mats, norms, CMatrix::Identity(d, d), CMatrix::Identity(d, d), true);
  }
  Rng rng(fnv1a("shared-eigenbasis"));
  for (int attempt = 0; attempt < 3; ++attempt) {
    CMatrix combo = CMatrix::Zero(d, d);
    for (std::size_t j = 0; j < mats.size(); ++j) combo += rng.uniform(0.5, 1.5) / (1.0 + norms[j]) * mats[j];
    std::optional<SharedEigenbasis> basis;
    if (hermitian) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(combo);
      if (es.info() != Eigen::Success) continue;
      basis = accept_basis(mats, norms, es.eigenvectors(), es.eigenvectors().adjoint(), true);
    } else {
      Eigen::ComplexEigenSolver<CMatrix> es(combo);
      if (es.info() != Eigen::Success) continue;
      Eigen::PartialPivLU<CMatrix> lu(es.eigenvectors());
      basis = accept_basis(mats, norms, es.eigenvectors(), lu.inverse(), false);
    }
    if (basis) return basis;
  }
  return std::nullopt;
}

void check_u(const CommutingGeneratorSet& set, const Eigen::VectorXd& u) {
  if (u.size() != set.n()) {
    throw ShapeError(fmt::format("parameter has {} components, the set has {} generators", u.size(), set.n()));
  }
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (!(u[j] >= 0.0)) throw DomainError(fmt::format("semigroup parameter u[{}] = {} is negative", j, u[j]));
  }
}

void check_x(const CommutingGeneratorSet& set, const CVector& x) {
  if (x.size() != set.d()) {
    throw ShapeError(fmt::format("vector of length {} for state dimension {}", x.size(), set.d()));
  }
}

/// exponent lambda . u for every joint eigenvalue.
CVector joint_exponents(const SharedEigenbasis& basis, const Eigen::VectorXd& u) {
  return basis.eigenvalues.transpose() * u.cast<cd>();
}

}  // namespace

CommutingGeneratorSet::CommutingGeneratorSet(std::vector<CMatrix> matrices, double commutator_tol, double m_bound,
                                             bool m_certified, std::optional<SharedEigenbasis> eigenbasis)
    : matrices_(std::move(matrices)), commutator_tol_(commutator_tol), m_bound_(m_bound),
      m_certified_(m_certified), eigenbasis_(std::move(eigenbasis)) {
  if (matrices_.empty()) throw ShapeError("a generator set needs at least one matrix");
}

bool CommutingGeneratorSet::fast_basis() const noexcept {
  return eigenbasis_.has_value() && eigenbasis_->condition <= 1e3;
}

CMatrix CommutingGeneratorSet::combination(const Eigen::VectorXd& c) const {
  CMatrix b = CMatrix::Zero(d(), d());
  for (int j = 0; j < n(); ++j) {
    if (c[j] != 0.0) b += c[j] * matrices_[static_cast<std::size_t>(j)];
  }
  return b;
}

std::vector<double> default_m_grid() { return log_space(1e-3, 1e3, 40); }

CommutingGeneratorSet make_commuting_set(std::vector<CMatrix> matrices, double commutator_tol,
                                         const std::vector<double>& t_grid) {
  if (matrices.empty()) throw ShapeError("a generator set needs at least one matrix");
  if (!(commutator_tol > 0.0)) throw DomainError("commutator_tol must be positive");
  const Eigen::Index d = matrices.front().rows();
  for (std::size_t j = 0; j < matrices.size(); ++j) {
    const CMatrix& a = matrices[j];
    if (a.rows() != a.cols()) throw ShapeError(fmt::format("matrix {} is {}x{}, not square", j, a.rows(), a.cols()));
    if (a.rows() != d) throw ShapeError(fmt::format("matrix {} has dimension {}, expected {}", j, a.rows(), d));
    if (d == 0) throw ShapeError("matrices must be at least 1x1");
    if (!a.allFinite()) throw DomainError(fmt::format("matrix {} has non-finite entries", j));
  }
  std::vector<double> norms;
  for (const CMatrix& a : matrices) norms.push_back(spectral_norm(a));
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    for (std::size_t j = i + 1; j < matrices.size(); ++j) {
      const double c = spectral_norm(matrices[i] * matrices[j] - matrices[j] * matrices[i]);
      if (c > commutator_tol * (norms[i] * norms[j] + 1.0)) throw CommutatorError(i, j, c);
    }
  }

  bool hermitian = true;
  bool nsd = true;
  for (std::size_t j = 0; j < matrices.size(); ++j) {
    if (!is_hermitian(matrices[j], norms[j])) {
      hermitian = false;
      nsd = false;
      break;
    }
    const CMatrix h = 0.5 * (matrices[j] + matrices[j].adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().maxCoeff() > 1e-13 * (1.0 + norms[j])) nsd = false;
  }

  double m = 1.0;
  if (!nsd) {
    for (const CMatrix& a : matrices) {
      for (double t : t_grid) m = std::max(m, spectral_norm(expm(t * a)));
    }
  }
  auto basis = find_eigenbasis(matrices, norms, hermitian);
  return CommutingGeneratorSet(std::move(matrices), commutator_tol, m, nsd, std::move(basis));
}

CVector semigroup_apply(const CommutingGeneratorSet& set, const Eigen::VectorXd& u, const CVector& x) {
  check_u(set, u);
  check_x(set, x);
  if (set.fast_basis()) {
    const SharedEigenbasis& b = *set.eigenbasis();
    CVector y = b.inverse * x;
    y.array() *= joint_exponents(b, u).array().exp();
    return b.vectors * y;
  }
  CVector y = x;
  for (int j = set.n() - 1; j >= 0; --j) {
    if (u[j] != 0.0) y = expm(u[j] * set.matrix(j)) * y;
  }
  return y;
}

CVector semigroup_minus_identity(const CommutingGeneratorSet& set, const Eigen::VectorXd& u, const CVector& x) {
  check_u(set, u);
  check_x(set, x);
  if (set.fast_basis()) {
    const SharedEigenbasis& b = *set.eigenbasis();
    CVector y = b.inverse * x;
    const CVector z = joint_exponents(b, u);
    for (Eigen::Index k = 0; k < y.size(); ++k) y[k] *= complex_expm1(z[k]);
    return b.vectors * y;
  }
  const CMatrix g = set.combination(u);
  return g * phi1_apply(g, x);
}

CMatrix semigroup_matrix(const CommutingGeneratorSet& set, const Eigen::VectorXd& u) {
  check_u(set, u);
  if (set.fast_basis()) {
    const SharedEigenbasis& b = *set.eigenbasis();
    return b.vectors * joint_exponents(b, u).array().exp().matrix().asDiagonal() * b.inverse;
  }
  CMatrix t = CMatrix::Identity(set.d(), set.d());
  for (int j = 0; j < set.n(); ++j) {
    if (u[j] != 0.0) t = t * expm(u[j] * set.matrix(j));
  }
  return t;
}

double deviation_from_identity(const CommutingGeneratorSet& set, const Eigen::VectorXd& u) {
  check_u(set, u);
  if (set.fast_basis() && set.eigenbasis()->unitary) {
    const CVector z = joint_exponents(*set.eigenbasis(), u);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) worst = std::max(worst, std::abs(complex_expm1(z[k])));
    return worst;
  }
  const CMatrix g = set.combination(u);
  // I - T(u) = -G phi_1(G), formed column by column without cancellation
  CMatrix dev(set.d(), set.d());
  for (int k = 0; k < set.d(); ++k) dev.col(k) = -(g * phi1_apply(g, CVector::Unit(set.d(), k)));
  return spectral_norm(dev);
}

double factor_deviation(const CommutingGeneratorSet& set, int j, double t) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(set.n());
  u[j] = t;
  return deviation_from_identity(set, u);
}

CMatrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<cd>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      while (end && *end == ' ') ++end;
      if (field.empty() || end == field.c_str() || (end && *end != '\0')) {
        throw ParseError("matrix", line_no, fmt::format("'{}' is not a number", field));
      }
      fields.push_back(v);
    }
    if (fields.size() % 2 != 0) throw ParseError("matrix", line_no, "odd number of fields (expected re,im pairs)");
    std::vector<cd> row;
    for (std::size_t k = 0; k < fields.size(); k += 2) row.emplace_back(fields[k], fields[k + 1]);
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("matrix", line_no, "row length differs from the first row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("matrix", 0, "no rows");
  CMatrix a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return a;
}

void write_matrix_csv(std::ostream& out, const CMatrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out << ',';
      out << csv_number(a(i, j).real()) << ',' << csv_number(a(i, j).imag());
    }
    out << '\n';
  }
}

}  // namespace bpcalc
