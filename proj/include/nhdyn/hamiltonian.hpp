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

// Extended phase space (q, p, v, π, e, π_e) of dimension 4n + 2 with
// canonical pairs (q, p), (v, π), (e, π_e) and the Hamiltonian
//
//   H = π²/2e + π·F(q, v) + p·v + μ_e π_e,
//
// where F is the Lagrange-d'Alembert acceleration field. The surface
// p = π = π_e = 0 is invariant and carries q̇ = v, v̇ = F, ė = μ_e.

#include <functional>
#include <vector>

#include "nhdyn/dual.hpp"
#include "nhdyn/engine.hpp"
#include "nhdyn/path.hpp"
#include "nhdyn/types.hpp"

namespace nhdyn {

struct ExtendedPhasePoint {
  Vector q;
  Vector p;
  Vector v;
  Vector pi;
  double e{1.0};
  double pi_e{0.0};

  int n() const { return static_cast<int>(q.size()); }

  /// Point on the constraint surface.
  static ExtendedPhasePoint on_surface(const Vector& q, const Vector& v,
                                       double e = 1.0);
};

/// Flat coordinate layout [q, p, v, π, e, π_e].
struct PhaseLayout {
  int n;
  int size() const { return 4 * n + 2; }
  int q(int i) const { return i; }
  int p(int i) const { return n + i; }
  int v(int i) const { return 2 * n + i; }
  int pi(int i) const { return 3 * n + i; }
  int e() const { return 4 * n; }
  int pi_e() const { return 4 * n + 1; }
};

Vector to_vector(const ExtendedPhasePoint& z);
ExtendedPhasePoint from_vector(const Vector& x, int n);

template <typename T>
T hamiltonian_value(const SystemSpec& spec, const VectorX<T>& z, const T& mu_e,
                    const T& t) {
  const PhaseLayout L{spec.n};
  const int n = spec.n;
  const T e = z(L.e());
  if (value_of(e) == 0.0) throw DomainError("Hamiltonian undefined at e = 0");
  const VectorX<T> q = z.segment(L.q(0), n);
  const VectorX<T> p = z.segment(L.p(0), n);
  const VectorX<T> v = z.segment(L.v(0), n);
  const VectorX<T> pi = z.segment(L.pi(0), n);
  const VectorX<T> force = total_acceleration(spec, q, v, t);
  return pi.squaredNorm() / (2.0 * e) + pi.dot(force) + p.dot(v) +
         mu_e * z(L.pi_e());
}

/// Throws DomainError at e = 0.
double hamiltonian_value(const SystemSpec& spec, const ExtendedPhasePoint& z,
                         double mu_e, double t = 0.0);

/// ż = {z, H}:
///   q̇ = v, v̇ = π/e + F, ė = μ_e,
///   ṗ_i = -Σ_j π_j ∂F_j/∂q_i, π̇_i = -p_i - Σ_j π_j ∂F_j/∂v_i,
///   π̇_e = π²/(2e²).
/// Flat layout as PhaseLayout.
Vector hamiltonian_vector_field(const SystemSpec& spec, const Vector& z,
                                double mu_e, double t = 0.0);
Vector hamiltonian_vector_field(const SystemSpec& spec,
                                const ExtendedPhasePoint& z, double mu_e,
                                double t = 0.0);

/// max(|π_e|, ‖p‖∞, ‖π‖∞).
double constraint_surface_residual(const ExtendedPhasePoint& z);

/// Scalar function on the flat phase space, evaluable on dual numbers so the
/// bracket can take exact gradients.
using PhaseFunction = std::function<Dual1(const VectorX<Dual1>&)>;

PhaseFunction phase_coordinate(int index);
PhaseFunction hamiltonian_function(const SystemSpec& spec, double mu_e,
                                   double t = 0.0);

/// ∂f/∂z over all 4n + 2 coordinates (one dual pass each).
Vector phase_gradient(const PhaseFunction& f, const Vector& z);

/// {f, g} = Σ ∂f/∂x ∂g/∂P - ∂f/∂P ∂g/∂x over the pairs (q,p), (v,π), (e,π_e).
double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g,
                       const Vector& z, int n);

/// Phase-space path with the multiplier μ_e sampled on the same grid.
struct PhasePath {
  std::vector<double> times;
  std::vector<ExtendedPhasePoint> points;
  std::vector<double> mu_e;
};

/// Gauge parameter α(t_k), sampled on the path grid.
struct GaugeInput {
  std::vector<double> alpha;
};

/// Infinitesimal local symmetry applied to a path:
///   δe = α (1 - v·q̇ / v²),  δp = α π² / (2 e² v²) v,  δμ_e = d(δe)/dt,
/// q, v, π, π_e untouched. q̇ and d/dt use first_derivative().
/// Throws VanishingVelocity when v² < 1e-12 at any sample.
PhasePath gauge_transform(const PhasePath& path, const GaugeInput& gauge);

}  // namespace nhdyn
