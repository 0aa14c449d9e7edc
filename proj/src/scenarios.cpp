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

#include "nhdyn/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace nhdyn {

namespace {

// Shortest round-tripping literal, parenthesized so negatives compose.
std::string lit(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return "(" + std::string(buf, ptr) + ")";
}

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

}  // namespace

void validate_params(const SleighParams& p) {
  if (!(p.m > 0.0) || !(p.inertia > 0.0)) {
    throw std::invalid_argument("sleigh mass and inertia must be positive");
  }
  if (!(p.k >= 0.0)) throw std::invalid_argument("friction k must be >= 0");
}

SleighVariant parse_sleigh_variant(const std::string& name) {
  if (name == "friction") return SleighVariant::kFriction;
  if (name == "lda_linear") return SleighVariant::kLdaLinear;
  if (name == "lda_nonlinear") return SleighVariant::kLdaNonlinear;
  if (name == "vakonomic_phi") return SleighVariant::kVakonomicPhi;
  throw std::invalid_argument("unknown sleigh variant '" + name + "'");
}

std::string to_string(SleighVariant variant) {
  switch (variant) {
    case SleighVariant::kFriction: return "friction";
    case SleighVariant::kLdaLinear: return "lda_linear";
    case SleighVariant::kLdaNonlinear: return "lda_nonlinear";
    case SleighVariant::kVakonomicPhi: return "vakonomic_phi";
  }
  return "unknown";
}

std::vector<std::string> list_scenarios() {
  return {"friction", "lda_linear", "lda_nonlinear", "vakonomic_phi",
          "damped_oscillator"};
}

Scenario build_sleigh_spec(SleighVariant variant, const SleighParams& p,
                           double c) {
  validate_params(p);
  const double period = 2.0 * std::numbers::pi / std::abs(p.omega);
  const Vector mass = vec3(p.m, p.m, p.inertia);
  Scenario s;
  s.name = to_string(variant);
  s.q0 = vec3(0.0, 0.0, 0.0);
  s.v0 = vec3(p.v0, 0.0, p.omega);
  s.t_end = period;
  switch (variant) {
    case SleighVariant::kFriction: {
      const std::string lateral = "(-v1*sin(q3) + v2*cos(q3))";
      s.spec = make_force_system(
          3, mass,
          {lit(p.k) + "*" + lateral + "*sin(q3)",
           "-" + lit(p.k) + "*" + lateral + "*cos(q3)", "0"});
      break;
    }
    case SleighVariant::kLdaLinear:
      s.spec = make_potential_system(3, mass, "0", {"v1*sin(q3) - v2*cos(q3)"});
      break;
    case SleighVariant::kLdaNonlinear:
      s.spec = make_potential_system(3, mass, "0", {"v2/v1 - tan(q3)"});
      // The constraint chart ends where ẏ¹ = 0 (and tan φ has its pole).
      s.t_end = 0.2 * period;
      s.guards.push_back(
          {"vy1_small", [](const Vector&, const Vector& v, double) {
             return std::abs(v(0)) - 1e-3;
           }});
      break;
    case SleighVariant::kVakonomicPhi: {
      const double mv = p.m * p.v0;
      const std::string torque = "(" + lit(c * c - mv * mv) + "*sin(2*q1) + " +
                                 lit(c * mv) + "*cos(2*q1))/" + lit(2.0 * p.m);
      Vector inertia(1);
      inertia << p.inertia;
      s.spec = make_force_system(1, inertia, {torque});
      s.q0 = Vector::Zero(1);
      s.v0 = Vector::Constant(1, p.omega);
      break;
    }
  }
  return s;
}

Eigen::Vector2d body_velocity(double phi, double y1dot, double y2dot) {
  const double c = std::cos(phi), s = std::sin(phi);
  return {y1dot * c + y2dot * s, -y1dot * s + y2dot * c};
}

Eigen::Vector3d sleigh_friction_rhs(const SleighParams& p,
                                    const Eigen::Vector3d& q,
                                    const Eigen::Vector3d& qdot) {
  const double phi = q(2);
  const double lateral = body_velocity(phi, qdot(0), qdot(1))(1);
  const double rate = p.k / p.m;
  return {rate * lateral * std::sin(phi), -rate * lateral * std::cos(phi), 0.0};
}

FrictionAnalyticSolution friction_analytic_constants(const SleighParams& p) {
  validate_params(p);
  const double disc = p.k * p.k - 4.0 * p.omega * p.omega * p.m * p.m;
  if (!(disc > 0.0)) {
    throw DomainError("strong-friction solution needs k > 2 m omega");
  }
  const double root = std::sqrt(disc);
  FrictionAnalyticSolution s;
  s.d2 = (p.k + root) / (2.0 * p.m);
  s.d1 = (p.k - root) / (2.0 * p.m);
  s.y1_inf = 2.0 * p.v0 * p.m / (p.omega * p.k);
  s.y2_inf = p.v0 / p.omega;
  const double w2 = p.omega * p.omega;
  s.phase1 = std::asin(std::clamp(-2.0 * s.d1 / (w2 + s.d1 * s.d1), -1.0, 1.0));
  s.phase2 = std::asin(std::clamp(-2.0 * s.d2 / (w2 + s.d2 * s.d2), -1.0, 1.0));
  return s;
}

Eigen::Vector3d sleigh_friction_analytic(const SleighParams& p, double t) {
  const FrictionAnalyticSolution s = friction_analytic_constants(p);
  const double wt = p.omega * t;
  const double pre = p.v0 / (p.omega * (s.d2 - s.d1));
  const double e1 = std::exp(-s.d1 * t), e2 = std::exp(-s.d2 * t);
  const double y1 = s.y1_inf + pre * (s.d2 * e1 * std::sin(wt + s.phase1) -
                                      s.d1 * e2 * std::sin(wt + s.phase2));
  const double y2 = s.y2_inf - pre * (s.d2 * e1 * std::cos(wt + s.phase1) -
                                      s.d1 * e2 * std::cos(wt + s.phase2));
  return {y1, y2, wt};
}

Eigen::Vector2d friction_final_position(const SleighParams& p,
                                        const Eigen::Vector3d& q,
                                        const Eigen::Vector3d& qdot) {
  // Body velocity u obeys u̇ = A u with A = [[0, ω], [-ω, -k/m]] while the
  // heading turns at ω. The remaining displacement, as a complex number, is
  // e^{iφ} [(sI - A)^{-1} u]_(1 + i·2) at s = -iω.
  using C = std::complex<double>;
  const double omega = qdot(2);
  const double kappa = p.k / p.m;
  const Eigen::Vector2d u = body_velocity(q(2), qdot(0), qdot(1));
  const C s(0.0, -omega);
  const C det = s * (s + kappa) + omega * omega;
  if (std::abs(det) == 0.0) {
    throw DomainError("friction tail diverges without friction or rotation");
  }
  const C u1 = ((s + kappa) * u(0) + omega * u(1)) / det;
  const C u2 = (-omega * u(0) + s * u(1)) / det;
  const C tail = std::exp(C(0.0, q(2))) * (u1 + C(0.0, 1.0) * u2);
  return {q(0) + tail.real(), q(1) + tail.imag()};
}

Eigen::Vector3d sleigh_circle(const SleighParams& p, double t) {
  const double wt = p.omega * t;
  const double r = p.v0 / p.omega;
  return {r * std::sin(wt), r * (1.0 - std::cos(wt)), wt};
}

double vakonomic_phi_rhs(const SleighParams& p, double c, double phi) {
  const double mv = p.m * p.v0;
  return ((c * c - mv * mv) * std::sin(2.0 * phi) +
          c * mv * std::cos(2.0 * phi)) /
         (2.0 * p.inertia * p.m);
}

Scenario damped_oscillator_spec(double omega, double k, int sign) {
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("oscillator sign must be +1 or -1");
  }
  Scenario s;
  s.name = "damped_oscillator";
  s.spec = make_force_system(
      1, Vector::Ones(1),
      {lit(sign * omega * omega) + "*q1 - " + lit(k * k) + "*v1"});
  s.q0 = Vector::Ones(1);
  s.v0 = Vector::Zero(1);
  s.t_end = 2.0 * std::numbers::pi / std::abs(omega);
  return s;
}

double damped_oscillator_solution(double omega, double k, int sign, double x0,
                                  double v0, double t) {
  using C = std::complex<double>;
  const double b = k * k;
  const C disc = std::sqrt(C(b * b + 4.0 * sign * omega * omega, 0.0));
  const C r1 = 0.5 * (-b + disc);
  const C r2 = 0.5 * (-b - disc);
  if (std::abs(r1 - r2) < 1e-12) {
    const C r = r1;
    return ((C(x0) + (C(v0) - r * x0) * t) * std::exp(r * t)).real();
  }
  const C a = (C(v0) - r2 * x0) / (r1 - r2);
  const C bb = C(x0) - a;
  return (a * std::exp(r1 * t) + bb * std::exp(r2 * t)).real();
}

}  // namespace nhdyn
