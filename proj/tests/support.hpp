#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

#include "bpcalc/operators.hpp"

namespace bpcalc::test {

inline CMatrix diag(std::initializer_list<double> values) {
  CMatrix a = CMatrix::Zero(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) {
    a(i, i) = v;
    ++i;
  }
  return a;
}

inline CVector cvec(std::initializer_list<double> values) {
  CVector x(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) x[i++] = v;
  return x;
}

inline Eigen::VectorXd rvec(std::initializer_list<double> values) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) x[i++] = v;
  return x;
}

inline Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace bpcalc::test
