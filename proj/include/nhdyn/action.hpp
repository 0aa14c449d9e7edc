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

// Action functionals on sampled paths and their numerical stationarity and
// gauge-invariance checks. Quadrature is the trapezoid rule; time
// derivatives use the second-order stencils of path.hpp throughout.

#include <cstddef>
#include <string>
#include <vector>

#include "nhdyn/engine.hpp"
#include "nhdyn/hamiltonian.hpp"
#include "nhdyn/path.hpp"

namespace nhdyn {

/// ∫ (e/2) ‖q̈ - F(q, q̇)‖² dt. Non-negative whenever e > 0.
double universal_action(const SystemSpec& spec, const ConfigPath& path,
                        const std::vector<double>& e_profile);

/// ∫ p·q̇ + π·v̇ + π_e ė - π²/2e - π·F - v·p - μ_e π_e dt.
/// Throws DomainError if e = 0 at any sample.
double first_order_action(const SystemSpec& spec, const PhasePath& path);

struct StationarityReport {
  double dt{0.0};
  double perturbation_scale{0.0};
  // Largest |∂S/∂z| over interior samples, divided by the quadrature weight
  // so it approximates the variational derivative.
  double max_gradient{0.0};
  std::size_t worst_sample{0};
  std::string worst_coordinate;
  double constant{0.0};
  double bound{0.0};  // constant · (dt² + perturbation_scale²)
  bool pass{false};
};

/// Central-difference gradient of first_order_action with respect to every
/// coordinate (q, p, v, π, e, π_e, μ_e) at every interior sample.
StationarityReport stationarity_check(const SystemSpec& spec,
                                      const PhasePath& path,
                                      double perturbation_scale,
                                      double constant = 10.0);

struct GaugeRecord {
  double amplitude{0.0};
  double delta_action{0.0};
};

struct GaugeReport {
  double dt{0.0};
  double amplitude{0.0};
  std::vector<GaugeRecord> records;
  double fitted_a{0.0};  // first-order coefficient of ΔS(α)
  double fitted_b{0.0};
  double noise_floor{0.0};    // roundoff level of fitted_a
  double endpoint_alpha{0.0};  // max |α| at the two ends of the grid
  double constant{0.0};
  double bound{0.0};  // constant · dt²
  bool pass{false};
};

/// ΔS = S_H(gauge_transform(path, a·α)) - S_H(path) for
/// a = amplitude·{1, 1/2, 1/4}, least-squares fit ΔS = A a + B a².
/// Passes when |A| <= constant · dt².
GaugeReport gauge_invariance_check(const SystemSpec& spec,
                                   const PhasePath& path,
                                   const std::vector<double>& alpha_profile,
                                   double amplitude, double constant = 1.0);

/// sin²(π (t - t0)/(t1 - t0)): smooth, vanishing with zero slope at both ends.
std::vector<double> bump_profile(const std::vector<double>& times);

}  // namespace nhdyn
