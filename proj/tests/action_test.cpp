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

#include "nhdyn/action.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nhdyn/integrate.hpp"

namespace nhdyn {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

SystemSpec free_particle() { return make_force_system(1, vec({1.0}), {"0"}); }

SystemSpec oscillator() {
  return make_potential_system(1, vec({1.0}), "0.5*q1^2", {});
}

ConfigPath sample_path(const std::function<double(double)>& f, double t1, int intervals) {
  ConfigPath path;
  const double dt = t1 / intervals;
  for (int k = 0; k <= intervals; ++k) {
    path.times.push_back(k * dt);
    path.q.push_back(vec({f(k * dt)}));
  }
  return path;
}

PhasePath on_shell_oscillator(double dt, double t_end) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.t_end = t_end;
  const auto traj = integrate_hamiltonian(
      oscillator(), ExtendedPhasePoint::on_surface(vec({0.0}), vec({1.0}), 1.0),
      [](double) { return 0.0; }, cfg);
  return to_phase_path(traj);
}

TEST(UniversalActionTest, QuadraticPath) {
  const ConfigPath path = sample_path([](double t) { return t * t; }, 1.0, 1000);
  const std::vector<double> e(path.times.size(), 1.0);
  EXPECT_NEAR(universal_action(free_particle(), path, e), 2.0, 1e-3);
}

TEST(UniversalActionTest, LinearInMultiplier) {
  const ConfigPath path =
      sample_path([](double t) { return std::sin(3 * t) + t * t; }, 1.0, 200);
  const std::vector<double> e1(path.times.size(), 1.0);
  const std::vector<double> e3(path.times.size(), 3.0);
  const double s1 = universal_action(oscillator(), path, e1);
  EXPECT_GT(s1, 0.0);
  EXPECT_NEAR(universal_action(oscillator(), path, e3), 3.0 * s1, 1e-14 * s1);
}

TEST(UniversalActionTest, ExactSolutionConvergesToZero) {
  double previous = 1.0;
  for (int intervals : {100, 200, 400}) {
    const ConfigPath path =
        sample_path([](double t) { return std::cos(t); }, 2.0, intervals);
    const std::vector<double> e(path.times.size(), 1.0);
    const double s = universal_action(oscillator(), path, e);
    EXPECT_GE(s, 0.0);
    EXPECT_LT(s, previous / 8.0);
    previous = s;
  }
}

TEST(FirstOrderActionTest, ConstantPath) {
  PhasePath path;
  for (int k = 0; k <= 10; ++k) {
    path.times.push_back(0.1 * k);
    path.points.push_back({vec({0.0}), vec({3.0}), vec({2.0}), vec({1.0}), 1.0, 0.0});
    path.mu_e.push_back(0.0);
  }
  EXPECT_NEAR(first_order_action(free_particle(), path), -6.5, 1e-12);
}

TEST(FirstOrderActionTest, VanishesOnSurface) {
  const PhasePath path = on_shell_oscillator(1e-2, 1.0);
  EXPECT_EQ(first_order_action(oscillator(), path), 0.0);
}

TEST(FirstOrderActionTest, ZeroMultiplierRejected) {
  PhasePath path = on_shell_oscillator(1e-1, 1.0);
  path.points[3].e = 0.0;
  EXPECT_THROW(first_order_action(oscillator(), path), DomainError);
}

TEST(StationarityTest, OnShellGradientShrinksWithStep) {
  double previous = 1.0;
  for (double dt : {2e-2, 1e-2, 5e-3}) {
    const PhasePath path = on_shell_oscillator(dt, 1.0);
    const StationarityReport r = stationarity_check(oscillator(), path, 1e-5);
    EXPECT_TRUE(r.pass) << "dt " << dt << " gradient " << r.max_gradient;
    EXPECT_LT(r.max_gradient, previous / 3.0);
    previous = r.max_gradient;
  }
}

TEST(StationarityTest, OffShellPathIsNotStationary) {
  PhasePath path = on_shell_oscillator(1e-2, 1.0);
  const std::vector<double> bump = bump_profile(path.times);
  for (std::size_t k = 0; k < path.points.size(); ++k) {
    path.points[k].q(0) += 0.1 * bump[k];
  }
  const StationarityReport r = stationarity_check(oscillator(), path, 1e-5);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.max_gradient, 1e-2);
}

TEST(GaugeInvarianceTest, ZeroParameterLeavesActionUnchanged) {
  const PhasePath path = on_shell_oscillator(1e-2, 1.0);
  const std::vector<double> zero(path.times.size(), 0.0);
  const GaugeReport r = gauge_invariance_check(oscillator(), path, zero, 1e-3);
  for (const auto& rec : r.records) EXPECT_EQ(rec.delta_action, 0.0);
}

TEST(GaugeInvarianceTest, FirstOrderVariationVanishesOffShell) {
  PhasePath path = on_shell_oscillator(1e-2, 1.0);
  const std::vector<double> bump = bump_profile(path.times);
  for (std::size_t k = 0; k < path.points.size(); ++k) {
    path.points[k].pi(0) += 0.2 * bump[k];
    path.points[k].p(0) += 0.1 * bump[k];
    path.points[k].pi_e += 0.05 * bump[k];
  }
  const GaugeReport r = gauge_invariance_check(oscillator(), path, bump, 1e-5);
  EXPECT_TRUE(r.pass) << "A " << r.fitted_a << " bound " << r.bound;
  EXPECT_LE(std::abs(r.fitted_a), r.bound);
  EXPECT_EQ(r.endpoint_alpha, 0.0);
}

TEST(GaugeInvarianceTest, OnShellVariationIsZero) {
  const PhasePath path = on_shell_oscillator(1e-2, 1.0);
  const std::vector<double> alpha = bump_profile(path.times);
  const GaugeReport r = gauge_invariance_check(oscillator(), path, alpha, 1e-3);
  for (const auto& rec : r.records) EXPECT_LE(std::abs(rec.delta_action), 1e-12);
}

TEST(BumpProfileTest, VanishesAtEnds) {
  std::vector<double> times;
  for (int k = 0; k <= 20; ++k) times.push_back(0.5 + 0.05 * k);
  const auto b = bump_profile(times);
  EXPECT_NEAR(b.front(), 0.0, 1e-30);
  EXPECT_NEAR(b.back(), 0.0, 1e-30);
  EXPECT_NEAR(b[10], 1.0, 1e-15);
}

}  // namespace
}  // namespace nhdyn
