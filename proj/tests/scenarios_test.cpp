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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

namespace nhdyn {
namespace {

constexpr double kPi = std::numbers::pi;

SleighParams friction_params(double k) {
  SleighParams p;
  p.k = k;
  return p;
}

TEST(ScenarioRegistryTest, Names) {
  const auto names = list_scenarios();
  ASSERT_EQ(names.size(), 5u);
  for (const char* n : {"friction", "lda_linear", "lda_nonlinear", "vakonomic_phi",
                        "damped_oscillator"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
  }
  EXPECT_EQ(parse_sleigh_variant("lda_linear"), SleighVariant::kLdaLinear);
  EXPECT_EQ(to_string(SleighVariant::kVakonomicPhi), "vakonomic_phi");
  EXPECT_THROW(parse_sleigh_variant("sled"), std::invalid_argument);
}

TEST(SleighParamsTest, Validation) {
  SleighParams p;
  EXPECT_NO_THROW(validate_params(p));
  p.m = 0.0;
  EXPECT_THROW(validate_params(p), std::invalid_argument);
  p = SleighParams{};
  p.k = -1.0;
  EXPECT_THROW(validate_params(p), std::invalid_argument);
}

TEST(FrictionTest, HandWrittenExamples) {
  const SleighParams p = friction_params(2.0);
  EXPECT_EQ(sleigh_friction_rhs(p, {0, 0, 0}, {0, 0, 0}).norm(), 0.0);
  const Eigen::Vector3d a = sleigh_friction_rhs(p, {0, 0, 0}, {0, 1, 0});
  EXPECT_NEAR(a(0), 0.0, 1e-15);
  EXPECT_NEAR(a(1), -2.0, 1e-15);
  const Eigen::Vector3d b = sleigh_friction_rhs(p, {0, 0, kPi / 2}, {-1, 0, 0});
  EXPECT_NEAR(b(0), 2.0, 1e-15);
  EXPECT_NEAR(b(1), 0.0, 1e-15);
}

TEST(FrictionTest, ExpressionSystemMatchesHandWritten) {
  SleighParams p = friction_params(3.5);
  p.m = 1.7;
  p.inertia = 0.6;
  const Scenario s = build_sleigh_spec(SleighVariant::kFriction, p);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector3d q(u(rng), u(rng), u(rng));
    const Eigen::Vector3d v(u(rng), u(rng), u(rng));
    const Vector a = total_acceleration(s.spec, EvalPoint{q, v, 0.0});
    EXPECT_LE((a - sleigh_friction_rhs(p, q, v)).norm(), 1e-13);
  }
}

TEST(FrictionTest, AnalyticConstants) {
  SleighParams p = friction_params(10.0);
  p.omega = 2.0;
  p.m = 1.5;
  const auto c = friction_analytic_constants(p);
  EXPECT_NEAR(c.d1 * c.d2, p.omega * p.omega, 1e-12);
  EXPECT_NEAR(c.d1 + c.d2, p.k / p.m, 1e-12);
  EXPECT_LT(c.d1, c.d2);
  EXPECT_THROW(friction_analytic_constants(friction_params(1.0)), DomainError);
}

TEST(FrictionTest, ClosedFormLimits) {
  const SleighParams p = friction_params(20.0);
  const auto c = friction_analytic_constants(p);
  const Eigen::Vector3d late = sleigh_friction_analytic(p, 2000.0);
  EXPECT_NEAR(late(0), c.y1_inf, 1e-9);
  EXPECT_NEAR(late(1), c.y2_inf, 1e-9);
  // The start-point mismatch of the closed form fades as friction grows.
  double previous = 1.0;
  for (double k : {10.0, 100.0, 1000.0}) {
    const double start = sleigh_friction_analytic(friction_params(k), 0.0).head<2>().norm();
    EXPECT_LT(start, previous);
    previous = start;
  }
}

TEST(FrictionTest, FinalPositionMatchesLongIntegration) {
  const SleighParams p = friction_params(10.0);
  const Scenario s = build_sleigh_spec(SleighVariant::kFriction, p);
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 400.0;
  cfg.record_every = 1000;
  const Trajectory traj = integrate_second_order(s.spec, s.q0, s.v0, cfg, s.guards);
  ASSERT_TRUE(traj.termination.completed());
  const Eigen::Vector2d from_start =
      friction_final_position(p, Eigen::Vector3d(s.q0), Eigen::Vector3d(s.v0));
  EXPECT_LE((traj.q.back().head<2>() - from_start).norm(), 1e-7);
  // Starting the tail part-way must give the same limit.
  const std::size_t mid = traj.size() / 4;
  const Eigen::Vector2d from_mid = friction_final_position(
      p, Eigen::Vector3d(traj.q[mid]), Eigen::Vector3d(traj.v[mid]));
  EXPECT_LE((from_mid - from_start).norm(), 1e-7);
}

TEST(CircleTest, Values) {
  const SleighParams p;
  EXPECT_EQ(sleigh_circle(p, 0.0).norm(), 0.0);
  const Eigen::Vector3d quarter = sleigh_circle(p, kPi / 2);
  EXPECT_NEAR(quarter(0), 1.0, 1e-15);
  EXPECT_NEAR(quarter(1), 1.0, 1e-15);
  EXPECT_NEAR(quarter(2), kPi / 2, 1e-15);
  const Eigen::Vector3d half = sleigh_circle(p, kPi);
  EXPECT_NEAR(half(0), 0.0, 1e-15);
  EXPECT_NEAR(half(1), 2.0, 1e-15);
}

TEST(ConstrainedSleighTest, LinearModelKeepsSpeed) {
  const SleighParams p;
  const Scenario s = build_sleigh_spec(SleighVariant::kLdaLinear, p);
  EXPECT_EQ(s.spec.constraints.size(), 1u);
  const Vector a = total_acceleration(s.spec, EvalPoint{s.q0, s.v0, 0.0});
  // Centripetal: (0, v0 ω, 0) at the start.
  EXPECT_NEAR(a(0), 0.0, 1e-15);
  EXPECT_NEAR(a(1), 1.0, 1e-15);
  EXPECT_NEAR(a(2), 0.0, 1e-15);
}

TEST(ConstrainedSleighTest, NonlinearModelHasChartGuard) {
  const Scenario s = build_sleigh_spec(SleighVariant::kLdaNonlinear, SleighParams{});
  ASSERT_EQ(s.guards.size(), 1u);
  EXPECT_NEAR(s.t_end, 0.4 * kPi, 1e-15);
  Eigen::Vector3d v(1e-4, 0, 0);
  EXPECT_LT(s.guards[0].fn(Vector::Zero(3), v, 0.0), 0.0);
}

TEST(VakonomicTest, RhsExamples) {
  const SleighParams p;
  EXPECT_EQ(vakonomic_phi_rhs(p, 0.0, 0.0), 0.0);
  EXPECT_NEAR(vakonomic_phi_rhs(p, 0.0, kPi / 4), -0.5, 1e-15);
  EXPECT_NEAR(vakonomic_phi_rhs(p, 1.0, 0.0), 0.5, 1e-15);
}

TEST(VakonomicTest, ExpressionSystemMatchesRhs) {
  SleighParams p;
  p.m = 1.3;
  p.inertia = 0.7;
  p.v0 = 0.9;
  for (double c : {0.0, 0.5, 2.0}) {
    const Scenario s = build_sleigh_spec(SleighVariant::kVakonomicPhi, p, c);
    for (double phi : {-1.0, 0.2, 0.9}) {
      Vector q(1), v(1);
      q << phi;
      v << 0.3;
      EXPECT_NEAR(total_acceleration(s.spec, EvalPoint{q, v, 0.0})(0),
                  vakonomic_phi_rhs(p, c, phi), 1e-14);
    }
  }
}

TEST(DampedOscillatorTest, UndampedPeriod) {
  const Scenario s = damped_oscillator_spec(2.0, 0.0);
  IntegratorConfig cfg;
  cfg.t_end = kPi;
  const Trajectory traj = integrate_second_order(s.spec, s.q0, s.v0, cfg);
  EXPECT_NEAR(traj.q.back()(0), 1.0, 1e-10);
  EXPECT_NEAR(traj.v.back()(0), 0.0, 1e-9);
}

TEST(DampedOscillatorTest, MatchesClosedFormAndDecays) {
  const double omega = 1.5, k = 0.8;
  const Scenario s = damped_oscillator_spec(omega, k);
  IntegratorConfig cfg;
  cfg.t_end = 10.0;
  const Trajectory traj = integrate_second_order(s.spec, s.q0, s.v0, cfg);
  const double wd = std::sqrt(omega * omega - std::pow(k, 4) / 4.0);
  const double amp = std::hypot(1.0, k * k / (2.0 * wd));
  for (std::size_t i = 0; i < traj.size(); i += 97) {
    const double t = traj.times[i];
    const double x = traj.q[i](0);
    EXPECT_NEAR(x, damped_oscillator_solution(omega, k, -1, 1.0, 0.0, t), 1e-9);
    EXPECT_LE(std::abs(x), amp * std::exp(-k * k * t / 2.0) + 1e-12);
  }
}

TEST(DampedOscillatorTest, RepulsiveSign) {
  const Scenario s = damped_oscillator_spec(1.0, 0.0, +1);
  IntegratorConfig cfg;
  cfg.t_end = 2.0;
  const Trajectory traj = integrate_second_order(s.spec, s.q0, s.v0, cfg);
  EXPECT_NEAR(traj.q.back()(0), std::cosh(2.0), 1e-10);
  EXPECT_NEAR(damped_oscillator_solution(1.0, 0.0, +1, 1.0, 0.0, 2.0), std::cosh(2.0),
              1e-12);
}

TEST(DampedOscillatorTest, CriticalDamping) {
  // k² = 2ω: x = (1 + ωt) e^{-ωt}.
  const double omega = 2.0, k = 2.0;
  for (double t : {0.0, 0.5, 3.0}) {
    EXPECT_NEAR(damped_oscillator_solution(omega, k, -1, 1.0, 0.0, t),
                (1 + omega * t) * std::exp(-omega * t), 1e-12);
  }
}

}  // namespace
}  // namespace nhdyn
