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

#include "nhdyn/engine.hpp"

#include <cmath>
#include <stdexcept>

namespace nhdyn {

void validate_system(const SystemSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("dimension n must be positive");
  if (spec.mass.size() != spec.n) {
    throw std::invalid_argument("mass vector length " +
                                std::to_string(spec.mass.size()) +
                                " does not match n = " +
                                std::to_string(spec.n));
  }
  for (int i = 0; i < spec.n; ++i) {
    if (!(spec.mass(i) > 0.0)) {
      throw std::invalid_argument("mass entries must be positive");
    }
  }
  auto check_dim = [&](const Expr& e, const char* what) {
    if (e.dimension() != spec.n) {
      throw std::invalid_argument(std::string(what) +
                                  " expression bound to wrong dimension");
    }
  };
  if (const auto* pot = std::get_if<PotentialForce>(&spec.base_force)) {
    check_dim(pot->potential, "potential");
  } else {
    const auto& forces = std::get<ExplicitForce>(spec.base_force).components;
    if (static_cast<int>(forces.size()) != spec.n) {
      throw std::invalid_argument("expected n force components");
    }
    for (const auto& f : forces) check_dim(f, "force");
  }
  for (const auto& d : spec.constraints.constraints) check_dim(d, "constraint");
  if (!(spec.constraints.regularity_threshold > 0.0)) {
    throw std::invalid_argument("regularity threshold must be positive");
  }
}

namespace {

ConstraintSet parse_constraints(int n, const std::vector<std::string>& sources,
                                double threshold) {
  ConstraintSet set;
  set.regularity_threshold = threshold;
  for (const auto& s : sources) set.constraints.push_back(parse_expression(s, n));
  return set;
}

}  // namespace

SystemSpec make_potential_system(int n, const Vector& mass,
                                 const std::string& potential,
                                 const std::vector<std::string>& constraints,
                                 double regularity_threshold) {
  SystemSpec spec{n, mass, PotentialForce{parse_expression(potential, n)},
                  parse_constraints(n, constraints, regularity_threshold)};
  validate_system(spec);
  return spec;
}

SystemSpec make_force_system(int n, const Vector& mass,
                             const std::vector<std::string>& forces,
                             const std::vector<std::string>& constraints,
                             double regularity_threshold) {
  ExplicitForce f;
  for (const auto& s : forces) f.components.push_back(parse_expression(s, n));
  SystemSpec spec{n, mass, std::move(f),
                  parse_constraints(n, constraints, regularity_threshold)};
  validate_system(spec);
  return spec;
}

Vector base_acceleration(const SystemSpec& spec, const EvalPoint& pt) {
  return base_acceleration<double>(spec, pt.q, pt.v, pt.t);
}

MultiplierResult<double> compute_multipliers(const SystemSpec& spec,
                                             const EvalPoint& pt) {
  return compute_multipliers<double>(spec, pt.q, pt.v, pt.t);
}

Vector total_acceleration(const SystemSpec& spec, const EvalPoint& pt) {
  return total_acceleration<double>(spec, pt.q, pt.v, pt.t);
}

Vector constraint_values(const SystemSpec& spec, const Vector& q,
                         const Vector& v, double t) {
  Vector d(spec.constraints.size());
  for (int a = 0; a < spec.constraints.size(); ++a) {
    d(a) = eval<double>(spec.constraints.constraints[a], q, v, t);
  }
  return d;
}

ForceJacobian force_jacobian(const SystemSpec& spec, const Vector& q,
                             const Vector& v, double t) {
  const int n = spec.n;
  ForceJacobian jac;
  jac.dq.resize(n, n);
  jac.dv.resize(n, n);
  VectorX<Dual1> qd = q.cast<Dual1>();
  VectorX<Dual1> vd = v.cast<Dual1>();
  const Dual1 td(t);
  for (int j = 0; j < n; ++j) {
    qd(j).der = 1.0;
    const VectorX<Dual1> a = total_acceleration(spec, qd, vd, td);
    qd(j).der = 0.0;
    for (int i = 0; i < n; ++i) jac.dq(i, j) = a(i).der;
    if (j == 0) {
      jac.force.resize(n);
      for (int i = 0; i < n; ++i) jac.force(i) = a(i).val;
    }
  }
  for (int j = 0; j < n; ++j) {
    vd(j).der = 1.0;
    const VectorX<Dual1> a = total_acceleration(spec, qd, vd, td);
    vd(j).der = 0.0;
    for (int i = 0; i < n; ++i) jac.dv(i, j) = a(i).der;
  }
  return jac;
}

Vector project_initial_state(const SystemSpec& spec, const Vector& q0,
                             const Vector& v0, double t, double tol,
                             int max_iterations) {
  if (spec.constraints.empty()) {
    throw std::invalid_argument("projection requires a non-empty constraint set");
  }
  const int m = spec.constraints.size();
  Vector v = v0;
  for (int iter = 0; iter <= max_iterations; ++iter) {
    Vector d(m);
    Matrix jac(m, spec.n);
    for (int a = 0; a < m; ++a) {
      const Gradient<double> g =
          gradient<double>(spec.constraints.constraints[a], q0, v, t);
      d(a) = g.value;
      jac.row(a) = g.dv.transpose();
    }
    if (d.lpNorm<Eigen::Infinity>() <= tol) return v;
    if (iter == max_iterations) break;
    const Matrix gram = jac * jac.transpose();
    Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        detail::min_eigenvalue<double>(gram) <= 1e-300) {
      throw NoConvergence("constraint projection hit a singular Jacobian");
    }
    v -= jac.transpose() * ldlt.solve(d);
    if (!v.allFinite()) {
      throw NoConvergence("constraint projection diverged");
    }
  }
  throw NoConvergence("constraint projection did not converge in " +
                      std::to_string(max_iterations) + " iterations");
}

}  // namespace nhdyn
