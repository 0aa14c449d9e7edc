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

// Chaplygin sleigh models (friction, linear and nonlinear knife-edge
// constraints, reduced vakonomic angle equation), the damped oscillator,
// and their closed-form references.
//
// Coordinates for the planar sleigh: q = (y¹, y², φ), masses (m, m, I),
// standard initial data y = 0, ẏ = (v₀, 0), φ = 0, φ̇ = ω.

#include <string>
#include <vector>

#include "nhdyn/engine.hpp"
#include "nhdyn/integrate.hpp"
#include "nhdyn/types.hpp"

namespace nhdyn {

struct SleighParams {
  double m{1.0};
  double inertia{1.0};
  double k{0.0};  // lateral friction coefficient, friction model only
  double v0{1.0};
  double omega{1.0};
};

/// Throws std::invalid_argument unless m, I > 0 and k >= 0.
void validate_params(const SleighParams& params);

enum class SleighVariant { kFriction, kLdaLinear, kLdaNonlinear, kVakonomicPhi };

SleighVariant parse_sleigh_variant(const std::string& name);
std::string to_string(SleighVariant variant);

/// Names accepted by the cli: the four sleigh variants and
/// "damped_oscillator".
std::vector<std::string> list_scenarios();

/// A ready-to-run system with its standard initial data.
struct Scenario {
  std::string name;
  SystemSpec spec;
  Vector q0;
  Vector v0;
  double t_end{0.0};
  std::vector<Guard> guards;
};

/// lda_* variants: U = 0, mass (m, m, I) and the constraint expression, so
/// the generic multiplier solve produces the dynamics. friction: explicit
/// lateral friction force. vakonomic_phi: one-dimensional angle equation with
/// integration constant c.
Scenario build_sleigh_spec(SleighVariant variant, const SleighParams& params,
                           double c = 0.0);

/// Friction model accelerations (ÿ¹, ÿ², φ̈) written out by hand; reference
/// for the expression-built system.
Eigen::Vector3d sleigh_friction_rhs(const SleighParams& params,
                                    const Eigen::Vector3d& q,
                                    const Eigen::Vector3d& qdot);

/// Body-frame velocity (forward, lateral) for heading φ.
Eigen::Vector2d body_velocity(double phi, double y1dot, double y2dot);

struct FrictionAnalyticSolution {
  double d1{0.0};  // slow decay rate
  double d2{0.0};  // fast decay rate
  double y1_inf{0.0};
  double y2_inf{0.0};
  double phase1{0.0};
  double phase2{0.0};
};

/// Constants of the strong-friction closed form. Requires k > 2mω
/// (DomainError otherwise).
FrictionAnalyticSolution friction_analytic_constants(const SleighParams& params);

/// Strong-friction closed form (y¹, y², φ) with its phase constants taken
/// literally. Approximate; a soft reference only.
Eigen::Vector3d sleigh_friction_analytic(const SleighParams& params, double t);

/// Position at t → ∞ of the friction model starting from (q, q̇), obtained
/// by integrating the linear body-frame velocity equations in closed form.
Eigen::Vector2d friction_final_position(const SleighParams& params,
                                        const Eigen::Vector3d& q,
                                        const Eigen::Vector3d& qdot);

/// Infinite-friction circle: φ = ωt, y¹ = (v₀/ω) sin ωt,
/// y² = (v₀/ω)(1 - cos ωt).
Eigen::Vector3d sleigh_circle(const SleighParams& params, double t);

/// φ̈ = ([c² - (m v₀)²] sin 2φ + c m v₀ cos 2φ) / (2 I m).
double vakonomic_phi_rhs(const SleighParams& params, double c, double phi);

/// ẍ = s ω² x - k² ẋ with s = -1 (restoring, default) or s = +1.
/// Initial data x = 1, ẋ = 0.
Scenario damped_oscillator_spec(double omega, double k, int sign = -1);

/// Closed-form solution of ẍ + k² ẋ - s ω² x = 0.
double damped_oscillator_solution(double omega, double k, int sign, double x0,
                                  double v0, double t);

}  // namespace nhdyn
