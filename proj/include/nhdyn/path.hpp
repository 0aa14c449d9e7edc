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

// Uniformly sampled paths and the finite-difference stencils shared by the
// action functionals and the gauge transformation.

#include <cstddef>
#include <vector>

#include "nhdyn/types.hpp"

namespace nhdyn {

/// Returns the grid spacing. Throws std::invalid_argument unless the grid has
/// at least min_samples strictly increasing, uniformly spaced (1e-12
/// relative) samples.
double validate_uniform_grid(const std::vector<double>& times,
                             std::size_t min_samples = 5);

/// Second-order first derivative: central in the interior, one-sided
/// three-point stencils at the ends.
template <typename V>
V first_derivative(const std::vector<V>& f, std::size_t k, double dt) {
  const std::size_t last = f.size() - 1;
  if (k == 0) return V((-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt));
  if (k == last) {
    return V((3.0 * f[last] - 4.0 * f[last - 1] + f[last - 2]) / (2.0 * dt));
  }
  return V((f[k + 1] - f[k - 1]) / (2.0 * dt));
}

/// Second-order second derivative: three-point central in the interior,
/// four-point one-sided at the ends.
template <typename V>
V second_derivative(const std::vector<V>& f, std::size_t k, double dt) {
  const std::size_t last = f.size() - 1;
  const double h2 = dt * dt;
  if (k == 0) return V((2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2);
  if (k == last) {
    return V((2.0 * f[last] - 5.0 * f[last - 1] + 4.0 * f[last - 2] -
              f[last - 3]) / h2);
  }
  return V((f[k + 1] - 2.0 * f[k] + f[k - 1]) / h2);
}

/// Trapezoid weight of sample k on a grid of `samples` points.
inline double trapezoid_weight(std::size_t k, std::size_t samples, double dt) {
  return (k == 0 || k + 1 == samples) ? 0.5 * dt : dt;
}

/// Configuration-space path q(t_k).
struct ConfigPath {
  std::vector<double> times;
  std::vector<Vector> q;
};

}  // namespace nhdyn
