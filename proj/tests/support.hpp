#pragma once

#include <doctest.h>

#include "specflow/error.hpp"
#include "specflow/herm.hpp"
#include "specflow/path.hpp"

namespace testing {

using namespace specflow;

inline herm::HermitianMatrix hm(std::initializer_list<std::initializer_list<double>> rows) {
  CMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return herm::HermitianMatrix(m);
}

inline herm::HermitianMatrix diag(std::initializer_list<double> v) {
  return herm::HermitianMatrix::diagonal(std::span<const double>(v.begin(), v.size()));
}

inline herm::HermitianMatrix scalar(double v) { return herm::HermitianMatrix::scalar(v); }

/// A(t) = from + phi(t) (to - from) with one profile.
inline path::OperatorPath one_term(const herm::HermitianMatrix& from, const herm::HermitianMatrix& to,
                                   path::ProfileKind kind = path::ProfileKind::TanhSigmoid, double center = 0.0,
                                   double width = 1.0) {
  return path::OperatorPath(from, {{path::Profile(kind, center, width), to - from}});
}

/// Scalar tanh path from -1 to 1.
inline path::OperatorPath scalar_tanh() { return one_term(scalar(-1.0), scalar(1.0)); }

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a specflow::Error");
  return ErrorCode::InternalConsistency;
}

}  // namespace testing
