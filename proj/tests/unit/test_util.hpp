#pragma once

#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "equiflow/common.hpp"

namespace equiflow::testing {

inline Complex omega(int order, int power = 1) { return std::polar(1.0, kTwoPi * power / order); }

inline CMatrix diag(std::initializer_list<Complex> entries) {
  CVector d(static_cast<Eigen::Index>(entries.size()));
  int i = 0;
  for (Complex z : entries) d(i++) = z;
  return d.asDiagonal();
}

inline CMatrix scalar(Complex z) {
  CMatrix m(1, 1);
  m(0, 0) = z;
  return m;
}

}  // namespace equiflow::testing

#define EXPECT_CNEAR(a, b, tol)                                                   \
  do {                                                                            \
    const ::equiflow::Complex ef_a_ = (a);                                        \
    const ::equiflow::Complex ef_b_ = (b);                                        \
    EXPECT_LE(std::abs(ef_a_ - ef_b_), (tol)) << "  actual " << ef_a_ << "\n  expected " << ef_b_; \
  } while (0)
