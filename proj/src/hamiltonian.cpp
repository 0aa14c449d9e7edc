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
#include <stdexcept>

namespace nhdyn {

ExtendedPhasePoint ExtendedPhasePoint::on_surface(const Vector& q,
                                                  const Vector& v, double e) {
  const Eigen::Index n = q.size();
  return {q, Vector::Zero(n), v, Vector::Zero(n), e, 0.0};
}

Vector to_vector(const ExtendedPhasePoint& z) {
  const PhaseLayout L{z.n()};
  Vector x(L.size());
  x << z.q, z.p, z.v, z.pi, z.e, z.pi_e;
  return x;
}

ExtendedPhasePoint from_vector(const Vector& x, int n) {
  const PhaseLayout L{n};
  if (x.size() != L.size()) {
    throw std::invalid_argument("phase vector must have 4n + 2 entries");
  }
  return {x.segment(L.q(0), n), x.segment(L.p(0), n), x.segment(L.v(0), n),
          x.segment(L.pi(0), n), x(L.e()), x(L.pi_e())};
}

double hamiltonian_value(const SystemSpec& spec, const ExtendedPhasePoint& z,
                         double mu_e, double t) {
  return hamiltonian_value<double>(spec, to_vector(z), mu_e, t);
}

Vector hamiltonian_vector_field(const SystemSpec& spec, const Vector& z,
                                double mu_e, double t) {
  const int n = spec.n;
  const PhaseLayout L{n};
  if (z.size() != L.size()) {
    throw std::invalid_argument("phase vector must have 4n + 2 entries");
  }
  const double e = z(L.e());
  if (e == 0.0) throw DomainError("vector field undefined at e = 0");
  const auto q = z.segment(L.q(0), n);
  const auto p = z.segment(L.p(0), n);
  const auto v = z.segment(L.v(0), n);
  const auto pi = z.segment(L.pi(0), n);

  const ForceJacobian jac = force_jacobian(spec, q, v, t);
  Vector rate(L.size());
  rate.segment(L.q(0), n) = v;
  rate.segment(L.v(0), n) = pi / e + jac.force;
  rate.segment(L.p(0), n) = -jac.dq.transpose() * pi;
  rate.segment(L.pi(0), n) = -p - jac.dv.transpose() * pi;
  rate(L.e()) = mu_e;
  rate(L.pi_e()) = pi.squaredNorm() / (2.0 * e * e);
  return rate;
}

Vector hamiltonian_vector_field(const SystemSpec& spec,
                                const ExtendedPhasePoint& z, double mu_e,
                                double t) {
  return hamiltonian_vector_field(spec, to_vector(z), mu_e, t);
}

double constraint_surface_residual(const ExtendedPhasePoint& z) {
  double r = std::abs(z.pi_e);
  if (z.p.size() > 0) r = std::max(r, z.p.lpNorm<Eigen::Infinity>());
  if (z.pi.size() > 0) r = std::max(r, z.pi.lpNorm<Eigen::Infinity>());
  return r;
}

PhaseFunction phase_coordinate(int index) {
  return [index](const VectorX<Dual1>& z) { return z(index); };
}

PhaseFunction hamiltonian_function(const SystemSpec& spec, double mu_e,
                                   double t) {
  return [&spec, mu_e, t](const VectorX<Dual1>& z) {
    return hamiltonian_value<Dual1>(spec, z, Dual1(mu_e), Dual1(t));
  };
}

Vector phase_gradient(const PhaseFunction& f, const Vector& z) {
  VectorX<Dual1> zd = z.cast<Dual1>();
  Vector g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    zd(i).der = 1.0;
    g(i) = f(zd).der;
    zd(i).der = 0.0;
  }
  return g;
}

double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g,
                       const Vector& z, int n) {
  const PhaseLayout L{n};
  if (z.size() != L.size()) {
    throw std::invalid_argument("phase vector must have 4n + 2 entries");
  }
  const Vector df = phase_gradient(f, z);
  const Vector dg = phase_gradient(g, z);
  double bracket = 0.0;
  for (int i = 0; i < n; ++i) {
    bracket += df(L.q(i)) * dg(L.p(i)) - df(L.p(i)) * dg(L.q(i));
    bracket += df(L.v(i)) * dg(L.pi(i)) - df(L.pi(i)) * dg(L.v(i));
  }
  bracket += df(L.e()) * dg(L.pi_e()) - df(L.pi_e()) * dg(L.e());
  return bracket;
}

PhasePath gauge_transform(const PhasePath& path, const GaugeInput& gauge) {
  const std::size_t samples = path.points.size();
  const double dt = validate_uniform_grid(path.times);
  if (samples != path.times.size() || path.mu_e.size() != samples ||
      gauge.alpha.size() != samples) {
    throw std::invalid_argument("gauge parameter and path grids differ");
  }

  std::vector<Vector> q(samples);
  for (std::size_t k = 0; k < samples; ++k) q[k] = path.points[k].q;

  std::vector<double> delta_e(samples);
  PhasePath out = path;
  for (std::size_t k = 0; k < samples; ++k) {
    const ExtendedPhasePoint& z = path.points[k];
    const double v2 = z.v.squaredNorm();
    if (v2 < 1e-12) {
      throw VanishingVelocity("gauge transformation needs |v| > 0 (sample " +
                              std::to_string(k) + ")");
    }
    const Vector qdot = first_derivative(q, k, dt);
    const double alpha = gauge.alpha[k];
    delta_e[k] = alpha * (1.0 - z.v.dot(qdot) / v2);
    const double scale = alpha * z.pi.squaredNorm() / (2.0 * z.e * z.e * v2);
    out.points[k].e += delta_e[k];
    out.points[k].p += scale * z.v;
  }
  for (std::size_t k = 0; k < samples; ++k) {
    out.mu_e[k] += first_derivative(delta_e, k, dt);
  }
  return out;
}

}  // namespace nhdyn
