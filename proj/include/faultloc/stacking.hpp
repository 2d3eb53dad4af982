#pragma once

#include "faultloc/types.hpp"

namespace faultloc {

// [Re(v); Im(v)] stacking of a complex vector.
RVector realify(const CVector& v);

// Inverse of realify. Throws ValidationError on odd length.
CVector complexify(const RVector& v);

// [Re(A), -Im(A); Im(A), Re(A)] stacking of a complex matrix, so that
// realify_matrix(A) * realify(x) == realify(A * x).
RMatrix realify_matrix(const CMatrix& a);

}  // namespace faultloc
