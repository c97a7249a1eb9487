#ifndef KRONADAPT_TESTS_HELPERS_HPP
#define KRONADAPT_TESTS_HELPERS_HPP

#include <cstring>

#include "kronadapt/rng.hpp"
#include "kronadapt/types.hpp"

namespace kronadapt::testing {

inline bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(),
                     sizeof(double) * static_cast<size_t>(a.size())) == 0;
}

inline double rel_err(const Matrix& got, const Matrix& want) {
  const double denom = want.norm();
  return (got - want).norm() / (denom > 0.0 ? denom : 1.0);
}

}  // namespace kronadapt::testing

#endif
