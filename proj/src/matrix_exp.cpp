#include <algorithm>
#include <array>
#include <cmath>

#include "bpcalc/operators.hpp"

namespace bpcalc {

namespace {

constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0, 129060195264000.0,
    10559470521600.0,    670442572800.0,      33522128640.0,      1323241920.0,       40840800.0,
    960960.0,            16380.0,             182.0,              1.0};
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

CMatrix expm(const CMatrix& a) {
  const Eigen::Index d = a.rows();
  if (d == 0) return a;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > kTheta13) s = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  const CMatrix x = a / std::ldexp(1.0, s);
  const CMatrix id = CMatrix::Identity(d, d);
  const CMatrix x2 = x * x;
  const CMatrix x4 = x2 * x2;
  const CMatrix x6 = x4 * x2;
  const auto& b = kPade13;
  const CMatrix u_inner = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id;
  const CMatrix u = x * u_inner;
  const CMatrix v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
  CMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < s; ++k) r = r * r;
  return r;
}

CVector phi1_apply(const CMatrix& a, const CVector& x) {
  const Eigen::Index d = a.rows();
  CMatrix aug = CMatrix::Zero(d + 1, d + 1);
  aug.topLeftCorner(d, d) = a;
  aug.topRightCorner(d, 1) = x;
  return expm(aug).topRightCorner(d, 1);
}

double spectral_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

}  // namespace bpcalc
