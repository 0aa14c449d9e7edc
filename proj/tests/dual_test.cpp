/*
 * Copyright 2026 The nhdyn Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "nhdyn/dual.hpp"
#include "nhdyn/types.hpp"

#include <cmath>

#include <gtest/gtest.h>

namespace nhdyn {
namespace {

TEST(DualTest, ProductAndQuotientRules) {
  const Dual1 x(3.0, 1.0);
  const Dual1 y = x * x / (x + 1.0);
  // d/dx x²/(x+1) = (x² + 2x)/(x+1)²
  EXPECT_DOUBLE_EQ(y.val, 9.0 / 4.0);
  EXPECT_DOUBLE_EQ(y.der, 15.0 / 16.0);
}

TEST(DualTest, NestedDualGivesSecondDerivative) {
  // f(x) = sin(x) x; f'' = 2cos(x) - x sin(x)
  const double x0 = 0.7;
  const Dual2 x(Dual1(x0, 1.0), Dual1(1.0, 0.0));
  const Dual2 f = sin(x) * x;
  EXPECT_DOUBLE_EQ(f.val.val, std::sin(x0) * x0);
  EXPECT_DOUBLE_EQ(f.der.val, std::cos(x0) * x0 + std::sin(x0));
  EXPECT_NEAR(f.der.der, 2.0 * std::cos(x0) - x0 * std::sin(x0), 1e-15);
}

TEST(DualTest, PowWithConstantExponentAtZeroBase) {
  const Dual1 x(0.0, 1.0);
  const Dual1 y = pow(x, Dual1(2.0));
  EXPECT_EQ(y.val, 0.0);
  EXPECT_EQ(y.der, 0.0);
}

TEST(DualTest, PowWithVariableExponent) {
  const Dual1 e(1.5, 1.0);
  const Dual1 y = pow(Dual1(2.0), e);
  EXPECT_NEAR(y.der, std::pow(2.0, 1.5) * std::log(2.0), 1e-14);
}

TEST(DualTest, EigenMatrixProducts) {
  VectorX<Dual1> a(2);
  a << Dual1(1.0, 1.0), Dual1(2.0, 0.0);
  MatrixX<Dual1> m(2, 2);
  m << Dual1(1.0), Dual1(2.0), Dual1(3.0), Dual1(4.0);
  const VectorX<Dual1> r = m * a;
  EXPECT_DOUBLE_EQ(r(0).val, 5.0);
  EXPECT_DOUBLE_EQ(r(0).der, 1.0);
  EXPECT_DOUBLE_EQ(r(1).der, 3.0);
}

TEST(DualTest, FiniteCheckSeesNestedTangents) {
  Dual2 x(Dual1(1.0, 0.0), Dual1(0.0, std::nan("")));
  EXPECT_FALSE(all_finite(x));
  EXPECT_DOUBLE_EQ(value_of(x), 1.0);
}

}  // namespace
}  // namespace nhdyn
