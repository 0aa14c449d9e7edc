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

// Time integration of the second-order Lagrange-d'Alembert system and of the
// extended-phase-space Hamiltonian flow, with per-sample constraint
// diagnostics and event location by bisection.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nhdyn/engine.hpp"
#include "nhdyn/hamiltonian.hpp"
#include "nhdyn/types.hpp"

namespace nhdyn {

enum class Method { kRk4, kRkf45 };

struct IntegratorConfig {
  Method method{Method::kRk4};
  double dt{1e-3};  // rk4 step; initial step for rkf45
  double atol{1e-10};
  double rtol{1e-10};
  double dt_min{1e-12};
  double dt_max{0.1};
  double t_end{1.0};
  double drift_tolerance{1e-6};
  bool projection{false};  // Newton velocity projection after every step
  int record_every{1};     // keep every k-th accepted step (the last always)
};

/// Throws std::invalid_argument on non-positive steps, tolerances or t_end.
void validate_config(const IntegratorConfig& cfg);

/// Scalar guard on (q, v, t). The run halts with an event at the first time
/// the guard becomes <= 0, located by bisection to 1e-10 in time.
struct Guard {
  std::string name;
  std::function<double(const Vector& q, const Vector& v, double t)> fn;
};

struct Termination {
  enum class Kind { kCompleted, kEvent, kError };
  Kind kind{Kind::kCompleted};
  std::string name;  // guard name or error kind
  double t{0.0};
  std::string message;

  bool completed() const { return kind == Kind::kCompleted; }
};

std::string to_string(Termination::Kind kind);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> q;
  std::vector<Vector> v;
  std::vector<Vector> constraint_values;  // D_α per sample
  std::vector<Vector> multipliers;        // h_α per sample
  std::vector<double> gram_min_eigenvalue;  // NaN without constraints
  Termination termination;
  bool projection{false};

  std::size_t size() const { return times.size(); }
  double max_drift() const;
};

/// Integrates q̈ = total_acceleration(q, q̇, t) from (q0, v0).
/// Throws InitialConstraintViolation when |D_α(q0, v0)| > 1e-10.
/// Built-in guards: "gram_margin" (smallest Gram eigenvalue above
/// 10·ε_reg) and, with projection off, "drift" (max |D| within
/// drift_tolerance).
Trajectory integrate_second_order(const SystemSpec& spec, const Vector& q0,
                                  const Vector& v0, const IntegratorConfig& cfg,
                                  const std::vector<Guard>& guards = {});

struct ExtendedTrajectory {
  std::vector<double> times;
  std::vector<ExtendedPhasePoint> points;
  std::vector<double> mu_e;
  std::vector<double> surface_residual;
  Termination termination;

  std::size_t size() const { return times.size(); }
};

using TimeFunction = std::function<double(double)>;

/// Integrates the 4n + 2 Hamiltonian vector field with multiplier μ_e(t).
/// Halts with event "e_zero" if e reaches 0.
ExtendedTrajectory integrate_hamiltonian(const SystemSpec& spec,
                                         const ExtendedPhasePoint& z0,
                                         const TimeFunction& mu_e,
                                         const IntegratorConfig& cfg);

/// Samples an extended trajectory as a PhasePath (for the action checks).
PhasePath to_phase_path(const ExtendedTrajectory& traj);

}  // namespace nhdyn
