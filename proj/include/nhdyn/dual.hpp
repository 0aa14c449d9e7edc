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

#pragma once

/**
 * @file dual.hpp
 * @brief Forward-mode dual numbers, nestable (Dual<Dual<double>>) for
 * second derivatives.
 *
 * A dual number is a + b·ε with ε² = 0. Every operation below carries the
 * tangent b along by the chain rule, so evaluating f(Dual{x, 1}) yields
 * {f(x), f'(x)}.
 */

#include <cmath>
#include <type_traits>

#include <Eigen/Core>

namespace nhdyn {

template <typename T>
struct Dual;

inline double value_of(double x) { return x; }
template <typename T>
double value_of(const Dual<T>& x);

inline bool is_zero(double x) { return x == 0.0; }
template <typename T>
bool is_zero(const Dual<T>& x);

template <typename T>
struct Dual {
  T val{0.0};
  T der{0.0};

  Dual() = default;
  Dual(double v) : val(v), der(0.0) {}  // NOLINT(runtime/explicit)
  template <typename U = T>
    requires(!std::is_same_v<U, double>)
  Dual(const T& v) : val(v), der(0.0) {}  // NOLINT(runtime/explicit)
  Dual(const T& v, const T& d) : val(v), der(d) {}

  Dual& operator+=(const Dual& o) {
    val += o.val;
    der += o.der;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    val -= o.val;
    der -= o.der;
    return *this;
  }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend Dual operator+(const Dual& a) { return a; }
  friend Dual operator-(const Dual& a) { return {-a.val, -a.der}; }
  friend Dual operator+(const Dual& a, const Dual& b) {
    return {a.val + b.val, a.der + b.der};
  }
  friend Dual operator-(const Dual& a, const Dual& b) {
    return {a.val - b.val, a.der - b.der};
  }
  friend Dual operator*(const Dual& a, const Dual& b) {
    return {a.val * b.val, a.der * b.val + a.val * b.der};
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    const T q = a.val / b.val;
    return {q, (a.der - q * b.der) / b.val};
  }

  // Comparisons look at the value part only.
  friend bool operator==(const Dual& a, const Dual& b) { return a.val == b.val; }
  friend bool operator!=(const Dual& a, const Dual& b) { return a.val != b.val; }
  friend bool operator<(const Dual& a, const Dual& b) { return a.val < b.val; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.val > b.val; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.val <= b.val; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.val >= b.val; }

  friend Dual sin(const Dual& a) {
    using std::cos;
    using std::sin;
    return {sin(a.val), cos(a.val) * a.der};
  }
  friend Dual cos(const Dual& a) {
    using std::cos;
    using std::sin;
    return {cos(a.val), -sin(a.val) * a.der};
  }
  friend Dual tan(const Dual& a) {
    using std::cos;
    using std::tan;
    const T c = cos(a.val);
    return {tan(a.val), a.der / (c * c)};
  }
  friend Dual exp(const Dual& a) {
    using std::exp;
    const T e = exp(a.val);
    return {e, e * a.der};
  }
  friend Dual log(const Dual& a) {
    using std::log;
    return {log(a.val), a.der / a.val};
  }
  friend Dual sqrt(const Dual& a) {
    using std::sqrt;
    const T s = sqrt(a.val);
    if (is_zero(a.der)) return {s, T(0.0)};
    return {s, a.der / (2.0 * s)};
  }
  // d|x|/dx is taken as 0 at x = 0.
  friend Dual abs(const Dual& a) {
    using std::abs;
    const double x = value_of(a.val);
    const double sign = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    return {abs(a.val), sign * a.der};
  }
  friend Dual pow(const Dual& a, const Dual& b) {
    using std::log;
    using std::pow;
    const T p = pow(a.val, b.val);
    T d(0.0);
    if (!is_zero(a.der)) d += b.val * pow(a.val, b.val - 1.0) * a.der;
    if (!is_zero(b.der)) d += p * log(a.val) * b.der;
    return {p, d};
  }
};

template <typename T>
double value_of(const Dual<T>& x) {
  return value_of(x.val);
}

template <typename T>
bool is_zero(const Dual<T>& x) {
  return is_zero(x.val) && is_zero(x.der);
}

// True when every component (value and all nested tangents) is finite.
inline bool all_finite(double x) { return std::isfinite(x); }
template <typename T>
bool all_finite(const Dual<T>& x) {
  return all_finite(x.val) && all_finite(x.der);
}

template <typename T>
struct is_dual : std::false_type {};
template <typename T>
struct is_dual<Dual<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_dual_v = is_dual<T>::value;

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

}  // namespace nhdyn

namespace Eigen {

template <typename T>
struct NumTraits<nhdyn::Dual<T>> : GenericNumTraits<nhdyn::Dual<T>> {
  using Real = nhdyn::Dual<T>;
  using NonInteger = nhdyn::Dual<T>;
  using Nested = nhdyn::Dual<T>;
  using Literal = nhdyn::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2 * NumTraits<T>::ReadCost,
    AddCost = 2 * NumTraits<T>::AddCost,
    MulCost = 3 * NumTraits<T>::MulCost
  };
  static inline Real epsilon() { return Real(NumTraits<double>::epsilon()); }
  static inline Real dummy_precision() {
    return Real(NumTraits<double>::dummy_precision());
  }
  static inline Real highest() { return Real(NumTraits<double>::highest()); }
  static inline Real lowest() { return Real(NumTraits<double>::lowest()); }
  static inline int digits10() { return NumTraits<double>::digits10(); }
};

}  // namespace Eigen
