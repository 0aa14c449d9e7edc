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

#include "nhdyn/hamiltonian.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace nhdyn {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

SystemSpec free_particle(int n) {
  std::vector<std::string> zeros(n, "0");
  return make_force_system(n, Vector::Ones(n), zeros);
}

SystemSpec nonlinear_sleigh() {
  return make_potential_system(3, vec({1.5, 1.5, 0.8}), "0.2*q1^2",
                               {"v2/v1 - tan(q3)"});
}

ExtendedPhasePoint point1(double q, double p, double v, double pi, double e,
                          double pi_e) {
  return {vec({q}), vec({p}), vec({v}), vec({pi}), e, pi_e};
}

Vector random_phase_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  Vector z(4 * n + 2);
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = u(rng);
  const PhaseLayout L{n};
  z(L.e()) = pos(rng);
  // Keep the nonlinear sleigh inside its chart: |v1| >= 0.5.
  z(L.v(0)) = pos(rng);
  return z;
}

TEST(HamiltonianValueTest, Examples) {
  const SystemSpec spec = free_particle(1);
  EXPECT_DOUBLE_EQ(hamiltonian_value(spec, point1(0, 0, 0, 1, 1, 0), 0.0), 0.5);
  EXPECT_DOUBLE_EQ(hamiltonian_value(spec, point1(0, 3, 2, 1, 1, 0), 0.0), 6.5);
  EXPECT_THROW(hamiltonian_value(spec, point1(0, 0, 1, 1, 0, 0), 0.0), DomainError);
}

TEST(HamiltonianValueTest, VanishesOnConstraintSurface) {
  const SystemSpec spec = nonlinear_sleigh();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Vector z = random_phase_point(rng, 3);
    ExtendedPhasePoint p = from_vector(z, 3);
    p.p.setZero();
    p.pi.setZero();
    p.pi_e = 0.0;
    ASSERT_EQ(constraint_surface_residual(p), 0.0);
    EXPECT_LE(std::abs(hamiltonian_value(spec, p, 5.0 * u(rng))), 1e-12);
  }
}

TEST(VectorFieldTest, OnSurfaceReducesToSecondOrderFlow) {
  const SystemSpec spec = nonlinear_sleigh();
  const Vector q = vec({0.3, -0.2, 0.4});
  const Vector v = vec({1.2, 0.5, -0.3});
  const Vector rate =
      hamiltonian_vector_field(spec, ExtendedPhasePoint::on_surface(q, v, 2.0), 0.7);
  const PhaseLayout L{3};
  const Vector a = total_acceleration(spec, EvalPoint{q, v, 0.0});
  EXPECT_EQ((rate.segment(L.q(0), 3) - v).norm(), 0.0);
  EXPECT_EQ((rate.segment(L.v(0), 3) - a).norm(), 0.0);
  EXPECT_EQ(rate(L.e()), 0.7);
  EXPECT_EQ(rate.segment(L.p(0), 3).norm(), 0.0);
  EXPECT_EQ(rate.segment(L.pi(0), 3).norm(), 0.0);
  EXPECT_EQ(rate(L.pi_e()), 0.0);
}

TEST(VectorFieldTest, FreeParticleOffSurface) {
  const Vector rate =
      hamiltonian_vector_field(free_particle(1), point1(0, 0, 0, 1, 1, 0), 0.0);
  const PhaseLayout L{1};
  EXPECT_DOUBLE_EQ(rate(L.v(0)), 1.0);
  EXPECT_DOUBLE_EQ(rate(L.pi(0)), 0.0);
  EXPECT_DOUBLE_EQ(rate(L.pi_e()), 0.5);
}

// ż_A = {z_A, H} with H differentiated by dual numbers end to end, against
// the hand-assembled field built from the force Jacobians.
TEST(VectorFieldTest, AgreesWithBracketOfCoordinatesWithHamiltonian) {
  const SystemSpec spec = nonlinear_sleigh();
  const PhaseLayout L{3};
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const Vector z = random_phase_point(rng, 3);
    const double mu = 0.3;
    const Vector rate = hamiltonian_vector_field(spec, z, mu);
    const PhaseFunction h = hamiltonian_function(spec, mu);
    for (int a = 0; a < L.size(); ++a) {
      const double via_bracket = poisson_bracket(phase_coordinate(a), h, z, 3);
      EXPECT_NEAR(rate(a), via_bracket, 1e-10 * std::max(1.0, std::abs(rate(a))))
          << "component " << a;
    }
  }
}

TEST(VectorFieldTest, AgreesWithFiniteDifferencesOfHamiltonian) {
  const SystemSpec spec = nonlinear_sleigh();
  const PhaseLayout L{3};
  std::mt19937_64 rng(3);
  const Vector z = random_phase_point(rng, 3);
  const double mu = -0.4;
  const Vector rate = hamiltonian_vector_field(spec, z, mu);
  auto h_at = [&](const Vector& x) {
    return hamiltonian_value(spec, from_vector(x, 3), mu);
  };
  const double step = 1e-6;
  auto dh = [&](int i) {
    Vector a = z, b = z;
    a(i) += step;
    b(i) -= step;
    return (h_at(a) - h_at(b)) / (2 * step);
  };
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(rate(L.q(i)), dh(L.p(i)), 1e-7);
    EXPECT_NEAR(rate(L.p(i)), -dh(L.q(i)), 1e-7);
    EXPECT_NEAR(rate(L.v(i)), dh(L.pi(i)), 1e-7);
    EXPECT_NEAR(rate(L.pi(i)), -dh(L.v(i)), 1e-7);
  }
  EXPECT_NEAR(rate(L.e()), dh(L.pi_e()), 1e-7);
  EXPECT_NEAR(rate(L.pi_e()), -dh(L.e()), 1e-7);
}

TEST(SurfaceResidualTest, MaxNorm) {
  ExtendedPhasePoint z{vec({0, 0}), vec({0, 0}), vec({1, 1}), vec({0, 0}), 1.0, 0.0};
  EXPECT_EQ(constraint_surface_residual(z), 0.0);
  z.pi = vec({1e-3, 0});
  EXPECT_EQ(constraint_surface_residual(z), 1e-3);
  EXPECT_EQ(constraint_surface_residual(point1(0, 1, 0, 2, 1, 3)), 3.0);
}

TEST(PoissonBracketTest, Examples) {
  const SystemSpec spec = free_particle(2);
  const PhaseLayout L{2};
  const Vector z = to_vector(ExtendedPhasePoint{vec({0.1, 0.2}), vec({0, 0}),
                                                vec({0.3, 0.4}), vec({1, 0}), 1.0, 0.0});
  EXPECT_EQ(poisson_bracket(phase_coordinate(L.q(0)), phase_coordinate(L.p(0)), z, 2), 1.0);
  EXPECT_EQ(poisson_bracket(phase_coordinate(L.q(0)), phase_coordinate(L.q(1)), z, 2), 0.0);
  EXPECT_EQ(poisson_bracket(phase_coordinate(L.v(1)), phase_coordinate(L.pi(1)), z, 2), 1.0);
  EXPECT_EQ(poisson_bracket(phase_coordinate(L.e()), phase_coordinate(L.pi_e()), z, 2), 1.0);
  EXPECT_DOUBLE_EQ(poisson_bracket(hamiltonian_function(spec, 0.0),
                                   phase_coordinate(L.pi_e()), z, 2),
                   -0.5);
}

TEST(PoissonBracketTest, AntisymmetryAndLeibniz) {
  const int n = 2;
  const PhaseLayout L{n};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  auto random_poly = [&]() -> PhaseFunction {
    Vector coef(L.size());
    for (Eigen::Index i = 0; i < coef.size(); ++i) coef(i) = c(rng);
    const int a = static_cast<int>(rng() % L.size());
    const int b = static_cast<int>(rng() % L.size());
    const double k = c(rng);
    return [coef, a, b, k](const VectorX<Dual1>& z) {
      Dual1 s = k * z(a) * z(b) * z(b);
      for (Eigen::Index i = 0; i < coef.size(); ++i) s += coef(i) * z(i);
      return s;
    };
  };
  for (int trial = 0; trial < 100; ++trial) {
    const PhaseFunction f = random_poly(), g = random_poly(), h = random_poly();
    Vector z(L.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = c(rng);
    const double fg = poisson_bracket(f, g, z, n);
    EXPECT_NEAR(fg, -poisson_bracket(g, f, z, n), 1e-8);
    const PhaseFunction gh = [&](const VectorX<Dual1>& x) { return g(x) * h(x); };
    const double lhs = poisson_bracket(f, gh, z, n);
    Vector zd = z;
    const double g0 = g(z.cast<Dual1>()).val, h0 = h(z.cast<Dual1>()).val;
    const double rhs = poisson_bracket(f, g, zd, n) * h0 + g0 * poisson_bracket(f, h, zd, n);
    EXPECT_NEAR(lhs, rhs, 1e-8);
  }
}

TEST(PoissonBracketTest, SurfaceConstraintsAreFirstClass) {
  const int n = 3;
  const PhaseLayout L{n};
  std::vector<int> constraints = {L.pi_e()};
  for (int i = 0; i < n; ++i) {
    constraints.push_back(L.p(i));
    constraints.push_back(L.pi(i));
  }
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector z = random_phase_point(rng, n);
    for (int a : constraints) {
      for (int b : constraints) {
        EXPECT_LE(std::abs(poisson_bracket(phase_coordinate(a),
                                           phase_coordinate(b), z, n)),
                  1e-12);
      }
    }
  }
}

PhasePath straight_path(double v, double qdot, double e, double pi, int samples,
                        double dt) {
  PhasePath path;
  for (int k = 0; k < samples; ++k) {
    const double t = k * dt;
    path.times.push_back(t);
    path.points.push_back(point1(qdot * t, 0.0, v, pi, e, 0.0));
    path.mu_e.push_back(0.0);
  }
  return path;
}

TEST(GaugeTransformTest, ZeroParameterIsIdentity) {
  const PhasePath path = straight_path(2.0, 1.0, 1.0, 3.0, 8, 0.1);
  const PhasePath out = gauge_transform(path, GaugeInput{std::vector<double>(8, 0.0)});
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_EQ(out.points[k].e, path.points[k].e);
    EXPECT_EQ(out.points[k].p(0), path.points[k].p(0));
    EXPECT_EQ(out.mu_e[k], path.mu_e[k]);
  }
}

TEST(GaugeTransformTest, SingleSampleValues) {
  const PhasePath path = straight_path(2.0, 1.0, 1.0, 3.0, 6, 0.1);
  const PhasePath out = gauge_transform(path, GaugeInput{std::vector<double>(6, 0.1)});
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_NEAR(out.points[k].e - 1.0, 0.05, 1e-14);
    EXPECT_NEAR(out.points[k].p(0), 0.225, 1e-14);
    EXPECT_NEAR(out.mu_e[k], 0.0, 1e-12);  // δe constant in time
    EXPECT_EQ(out.points[k].q(0), path.points[k].q(0));
    EXPECT_EQ(out.points[k].v(0), path.points[k].v(0));
    EXPECT_EQ(out.points[k].pi(0), path.points[k].pi(0));
  }
}

TEST(GaugeTransformTest, TrivialOnShell) {
  // q̇ = v exactly (linear motion), π = 0.
  const PhasePath path = straight_path(1.5, 1.5, 1.0, 0.0, 10, 0.05);
  std::vector<double> alpha(10);
  for (int k = 0; k < 10; ++k) alpha[k] = std::sin(0.3 * k);
  const PhasePath out = gauge_transform(path, GaugeInput{alpha});
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_NEAR(out.points[k].e, 1.0, 1e-14);
    EXPECT_EQ(out.points[k].p(0), 0.0);
  }
}

TEST(GaugeTransformTest, VanishingVelocityRejected) {
  const PhasePath path = straight_path(0.0, 0.0, 1.0, 1.0, 6, 0.1);
  EXPECT_THROW(gauge_transform(path, GaugeInput{std::vector<double>(6, 0.1)}),
               VanishingVelocity);
}

}  // namespace
}  // namespace nhdyn
