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

// Scalar expressions in q1..qn, v1..vn and t.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | variable | func '(' sum ')' | '(' sum ')'
// so -q1^2 is -(q1^2) and 2^-1 is 2^(-1).

#include <cmath>
#include <memory>
#include <string>
#include <string_view>

#include "nhdyn/dual.hpp"
#include "nhdyn/errors.hpp"
#include "nhdyn/types.hpp"

namespace nhdyn {

enum class NodeKind { kConstant, kVariable, kUnary, kBinary };
enum class VarKind { kQ, kV, kT };
enum class UnaryOp { kNeg, kSin, kCos, kTan, kExp, kLog, kSqrt, kAbs };
enum class BinaryOp { kAdd, kSub, kMul, kDiv, kPow };

struct ExprNode {
  NodeKind kind{NodeKind::kConstant};
  double value{0.0};          // kConstant
  VarKind var{VarKind::kT};   // kVariable
  int index{0};               // kVariable, 1-based; 0 for t
  UnaryOp unary{UnaryOp::kNeg};
  BinaryOp binary{BinaryOp::kAdd};
  std::shared_ptr<const ExprNode> lhs;  // operand of unary ops
  std::shared_ptr<const ExprNode> rhs;
};

/// Immutable parsed expression bound to a dimension n.
class Expr {
 public:
  Expr(std::shared_ptr<const ExprNode> root, int dimension)
      : root_(std::move(root)), dimension_(dimension) {}

  const ExprNode& root() const { return *root_; }
  int dimension() const { return dimension_; }

 private:
  std::shared_ptr<const ExprNode> root_;
  int dimension_;
};

/// Throws ParseError on malformed input, unknown identifiers, or variable
/// indices outside [1, n].
Expr parse_expression(std::string_view source, int n);

/// Canonical, fully parenthesized serialization. Constants use the shortest
/// round-tripping decimal form, so parse(to_string(e)) reproduces e exactly.
std::string to_string(const Expr& expr);

bool structurally_equal(const ExprNode& a, const ExprNode& b);

struct EvalPoint {
  Vector q;
  Vector v;  // velocities
  double t{0.0};
};

namespace detail {

void throw_domain(const char* what);

template <typename T>
T checked(T x) {
  if (!all_finite(x)) throw_domain("non-finite intermediate value");
  return x;
}

template <typename T>
T eval_node(const ExprNode& node, const VectorX<T>& q, const VectorX<T>& v,
            const T& t) {
  using std::abs;
  using std::cos;
  using std::exp;
  using std::log;
  using std::pow;
  using std::sin;
  using std::sqrt;
  using std::tan;
  switch (node.kind) {
    case NodeKind::kConstant:
      return T(node.value);
    case NodeKind::kVariable:
      switch (node.var) {
        case VarKind::kQ:
          return q(node.index - 1);
        case VarKind::kV:
          return v(node.index - 1);
        case VarKind::kT:
          return t;
      }
      break;
    case NodeKind::kUnary: {
      const T a = eval_node(*node.lhs, q, v, t);
      const double x = value_of(a);
      switch (node.unary) {
        case UnaryOp::kNeg:
          return -a;
        case UnaryOp::kSin:
          return checked(sin(a));
        case UnaryOp::kCos:
          return checked(cos(a));
        case UnaryOp::kTan:
          if (std::abs(std::cos(x)) < 1e-15) throw_domain("tan pole");
          return checked(tan(a));
        case UnaryOp::kExp:
          return checked(exp(a));
        case UnaryOp::kLog:
          if (!(x > 0.0)) throw_domain("log of non-positive argument");
          return checked(log(a));
        case UnaryOp::kSqrt:
          if (x < 0.0) throw_domain("sqrt of negative argument");
          return checked(sqrt(a));
        case UnaryOp::kAbs:
          return abs(a);
      }
      break;
    }
    case NodeKind::kBinary: {
      const T a = eval_node(*node.lhs, q, v, t);
      const T b = eval_node(*node.rhs, q, v, t);
      switch (node.binary) {
        case BinaryOp::kAdd:
          return checked(a + b);
        case BinaryOp::kSub:
          return checked(a - b);
        case BinaryOp::kMul:
          return checked(a * b);
        case BinaryOp::kDiv:
          if (value_of(b) == 0.0) throw_domain("division by zero");
          return checked(a / b);
        case BinaryOp::kPow: {
          const double base = value_of(a);
          const double expo = value_of(b);
          if (base < 0.0 && expo != std::round(expo)) {
            throw_domain("negative base with non-integer exponent");
          }
          return checked(pow(a, b));
        }
      }
      break;
    }
  }
  throw_domain("corrupt expression node");
  return T(0.0);
}

}  // namespace detail

/// Evaluates at (q, v, t). Throws DomainError when the result or any
/// intermediate leaves the reals.
template <typename T>
T eval(const Expr& expr, const VectorX<T>& q, const VectorX<T>& v,
       const T& t) {
  if (q.size() != expr.dimension() || v.size() != expr.dimension()) {
    throw std::invalid_argument("evaluation point dimension mismatch");
  }
  return detail::eval_node(expr.root(), q, v, t);
}

double eval(const Expr& expr, const EvalPoint& pt);

template <typename T>
struct Gradient {
  T value;
  VectorX<T> dq;
  VectorX<T> dv;
  T dt;
};

/// Exact first partials by 2n + 1 forward dual passes. With T = Dual<double>
/// the result carries directional second derivatives.
template <typename T>
Gradient<T> gradient(const Expr& expr, const VectorX<T>& q, const VectorX<T>& v,
                     const T& t) {
  using D = Dual<T>;
  const Eigen::Index n = q.size();
  VectorX<D> qd(n), vd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    qd(i) = D(q(i));
    vd(i) = D(v(i));
  }
  D td(t);

  Gradient<T> g{T(0.0), VectorX<T>::Zero(n), VectorX<T>::Zero(n), T(0.0)};
  for (Eigen::Index i = 0; i < n; ++i) {
    qd(i).der = T(1.0);
    const D r = eval(expr, qd, vd, td);
    g.dq(i) = r.der;
    g.value = r.val;
    qd(i).der = T(0.0);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    vd(i).der = T(1.0);
    g.dv(i) = eval(expr, qd, vd, td).der;
    vd(i).der = T(0.0);
  }
  td.der = T(1.0);
  const D r = eval(expr, qd, vd, td);
  g.dt = r.der;
  g.value = r.val;
  return g;
}

Gradient<double> grad(const Expr& expr, const EvalPoint& pt);

}  // namespace nhdyn
