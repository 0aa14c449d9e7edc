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

#include "nhdyn/path.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nhdyn {

double validate_uniform_grid(const std::vector<double>& times,
                             std::size_t min_samples) {
  if (times.size() < min_samples) {
    throw std::invalid_argument("path needs at least " +
                                std::to_string(min_samples) + " samples");
  }
  const double dt = (times.back() - times.front()) /
                    static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw std::invalid_argument("time grid must increase");
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double step = times[k] - times[k - 1];
    if (!(step > 0.0) || std::abs(step - dt) > 1e-12 * std::abs(dt) +
                                                   4e-16 * std::abs(times[k])) {
      throw std::invalid_argument("time grid must be uniform");
    }
  }
  return dt;
}

}  // namespace nhdyn
