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

// Lagrange-d'Alembert force assembly.
//
// The equations of motion are
//
//   mass_i q̈_i = F0_i(q, v) + Σ_α h_α ∂D_α/∂v_i,
//
// with the multipliers h fixed by requiring dD_α/dt = 0 along the motion:
//
//   Σ_β G_αβ h_β = b_α,
//   G_αβ = Σ_i ∂D_α/∂v_i (1/mass_i) ∂D_β/∂v_i,
//   b_α  = -Σ_i ∂D_α/∂q_i v_i - ∂D_α/∂t - Σ_i ∂D_α/∂v_i F0_i / mass_i.
//
// Everything is templated on the scalar so the same code runs with doubles
// and with dual numbers (for force Jacobians through the multiplier solve).

#include <string>
#include <variant>
#include <vector>

#include "nhdyn/dual.hpp"
#include "nhdyn/errors.hpp"
#include "nhdyn/expr.hpp"
#include "nhdyn/types.hpp"

namespace nhdyn {

/// F0 = -∇U.
struct PotentialForce {
  Expr potential;
};

/// F0_i given component-wise; may depend on velocities (friction).
struct ExplicitForce {
  std::vector<Expr> components;
};

struct ConstraintSet {
  std::vector<Expr> constraints;
  double regularity_threshold{1e-10};

  bool empty() const { return constraints.empty(); }
  int size() const { return static_cast<int>(constraints.size()); }
};

struct SystemSpec {
  int n{0};
  Vector mass;  // diagonal of the mass matrix
  std::variant<ExplicitForce, PotentialForce> base_force;
  ConstraintSet constraints;
};

/// Throws std::invalid_argument if masses are non-positive or any expression
/// is bound to a different dimension.
void validate_system(const SystemSpec& spec);

/// Parses and validates. Empty constraint list means an unconstrained system.
SystemSpec make_potential_system(int n, const Vector& mass,
                                 const std::string& potential,
                                 const std::vector<std::string>& constraints = {},
                                 double regularity_threshold = 1e-10);
SystemSpec make_force_system(int n, const Vector& mass,
                             const std::vector<std::string>& forces,
                             const std::vector<std::string>& constraints = {},
                             double regularity_threshold = 1e-10);

template <typename T>
struct MultiplierResult {
  VectorX<T> h;
  MatrixX<T> gram;
  VectorX<T> rhs;
  MatrixX<T> jacobian_v;  // rows ∂D_α/∂v
  VectorX<T> residuals;   // D_α
  double min_eigenvalue{0.0};
};

namespace detail {

inline VectorX<double> solve_spd(const MatrixX<double>& a,
                                 const VectorX<double>& b) {
  Eigen::LLT<MatrixX<double>> llt(a);
  if (llt.info() != Eigen::Success) {
    throw RegularityError("constraint Gram matrix not positive definite", 0.0);
  }
  return llt.solve(b);
}

// Tangent of A x = b:  A ẋ = ḃ - Ȧ x, solved with the value factorization.
template <typename T>
VectorX<Dual<T>> solve_spd(const MatrixX<Dual<T>>& a,
                           const VectorX<Dual<T>>& b) {
  const MatrixX<T> av = a.unaryExpr([](const Dual<T>& x) { return x.val; });
  const MatrixX<T> ad = a.unaryExpr([](const Dual<T>& x) { return x.der; });
  const VectorX<T> bv = b.unaryExpr([](const Dual<T>& x) { return x.val; });
  const VectorX<T> bd = b.unaryExpr([](const Dual<T>& x) { return x.der; });
  const VectorX<T> xv = solve_spd(av, bv);
  const VectorX<T> xd = solve_spd(av, VectorX<T>(bd - ad * xv));
  VectorX<Dual<T>> x(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) x(i) = Dual<T>(xv(i), xd(i));
  return x;
}

template <typename T>
double min_eigenvalue(const MatrixX<T>& a) {
  const Matrix values = a.unaryExpr([](const T& x) { return value_of(x); });
  if (values.rows() == 1) return values(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(values, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace detail

template <typename T>
VectorX<T> base_force(const SystemSpec& spec, const VectorX<T>& q,
                      const VectorX<T>& v, const T& t) {
  const int n = spec.n;
  if (q.size() != n || v.size() != n) {
    throw std::invalid_argument("state dimension does not match system");
  }
  if (const auto* pot = std::get_if<PotentialForce>(&spec.base_force)) {
    return -gradient(pot->potential, q, v, t).dq;
  }
  const auto& forces = std::get<ExplicitForce>(spec.base_force).components;
  VectorX<T> f(n);
  for (int i = 0; i < n; ++i) f(i) = eval(forces[i], q, v, t);
  return f;
}

template <typename T>
VectorX<T> base_acceleration(const SystemSpec& spec, const VectorX<T>& q,
                             const VectorX<T>& v, const T& t) {
  VectorX<T> a = base_force(spec, q, v, t);
  for (int i = 0; i < spec.n; ++i) a(i) /= T(spec.mass(i));
  return a;
}

namespace detail {

template <typename T>
MultiplierResult<T> multipliers_given_base(const SystemSpec& spec,
                                           const VectorX<T>& q,
                                           const VectorX<T>& v, const T& t,
                                           const VectorX<T>& base_accel) {
  const int n = spec.n;
  const int m = spec.constraints.size();
  MultiplierResult<T> r;
  r.jacobian_v = MatrixX<T>::Zero(m, n);
  r.rhs = VectorX<T>::Zero(m);
  r.residuals = VectorX<T>::Zero(m);
  for (int a = 0; a < m; ++a) {
    const Gradient<T> g = gradient(spec.constraints.constraints[a], q, v, t);
    r.residuals(a) = g.value;
    r.jacobian_v.row(a) = g.dv.transpose();
    T b = -g.dt;
    for (int i = 0; i < n; ++i) b -= g.dq(i) * v(i) + g.dv(i) * base_accel(i);
    r.rhs(a) = b;
  }
  MatrixX<T> scaled = r.jacobian_v;
  for (int i = 0; i < n; ++i) scaled.col(i) /= T(spec.mass(i));
  r.gram = scaled * r.jacobian_v.transpose();
  r.min_eigenvalue = min_eigenvalue(r.gram);
  if (!(r.min_eigenvalue >= spec.constraints.regularity_threshold)) {
    throw RegularityError(
        "constraint Gram matrix degenerate (smallest eigenvalue " +
            std::to_string(r.min_eigenvalue) + ")",
        r.min_eigenvalue);
  }
  r.h = solve_spd(r.gram, r.rhs);
  return r;
}

}  // namespace detail

/// Solves the consistency condition dD/dt = 0 for the multipliers.
/// Throws RegularityError when the Gram matrix is degenerate.
template <typename T>
MultiplierResult<T> compute_multipliers(const SystemSpec& spec,
                                        const VectorX<T>& q,
                                        const VectorX<T>& v, const T& t) {
  return detail::multipliers_given_base(spec, q, v, t,
                                        base_acceleration(spec, q, v, t));
}

/// q̈ of the Lagrange-d'Alembert equations; equals base_acceleration when the
/// constraint set is empty.
template <typename T>
VectorX<T> total_acceleration(const SystemSpec& spec, const VectorX<T>& q,
                              const VectorX<T>& v, const T& t) {
  VectorX<T> a = base_acceleration(spec, q, v, t);
  if (spec.constraints.empty()) return a;
  const MultiplierResult<T> r =
      detail::multipliers_given_base(spec, q, v, t, a);
  VectorX<T> reaction = r.jacobian_v.transpose() * r.h;
  for (int i = 0; i < spec.n; ++i) a(i) += reaction(i) / T(spec.mass(i));
  return a;
}

Vector base_acceleration(const SystemSpec& spec, const EvalPoint& pt);
MultiplierResult<double> compute_multipliers(const SystemSpec& spec,
                                             const EvalPoint& pt);
Vector total_acceleration(const SystemSpec& spec, const EvalPoint& pt);

/// D_α(q, v, t) for every constraint.
Vector constraint_values(const SystemSpec& spec, const Vector& q,
                         const Vector& v, double t = 0.0);

/// Acceleration field F(q, v) of q̈ = F together with its Jacobians, the
/// latter by dual-number passes through the multiplier solve.
struct ForceJacobian {
  Vector force;
  Matrix dq;  // dq(i, j) = ∂F_i/∂q_j
  Matrix dv;
};

ForceJacobian force_jacobian(const SystemSpec& spec, const Vector& q,
                             const Vector& v, double t);

/// Newton iteration on v along span{∂D_α/∂v} until |D_α| <= tol.
/// Returns v0 unchanged if it already satisfies the constraints.
/// Throws NoConvergence after max_iterations.
Vector project_initial_state(const SystemSpec& spec, const Vector& q0,
                             const Vector& v0, double t = 0.0,
                             double tol = 1e-12, int max_iterations = 50);

}  // namespace nhdyn
