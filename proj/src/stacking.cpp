#include "faultloc/stacking.hpp"

#include "faultloc/errors.hpp"

namespace faultloc {

RVector realify(const CVector& v) {
  const Eigen::Index n = v.size();
  RVector out(2 * n);
  out.head(n) = v.real();
  out.tail(n) = v.imag();
  return out;
}

CVector complexify(const RVector& v) {
  if (v.size() % 2 != 0) {
    throw ValidationError("complexify: vector length must be even, got " +
                          std::to_string(v.size()));
  }
  const Eigen::Index n = v.size() / 2;
  CVector out(n);
  out.real() = v.head(n);
  out.imag() = v.tail(n);
  return out;
}

RMatrix realify_matrix(const CMatrix& a) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  RMatrix out(2 * m, 2 * n);
  out.topLeftCorner(m, n) = a.real();
  out.topRightCorner(m, n) = -a.imag();
  out.bottomLeftCorner(m, n) = a.imag();
  out.bottomRightCorner(m, n) = a.real();
  return out;
}

}  // namespace faultloc
