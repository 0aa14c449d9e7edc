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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nhdyn {

double universal_action(const SystemSpec& spec, const ConfigPath& path,
                        const std::vector<double>& e_profile) {
  const std::size_t samples = path.q.size();
  if (samples != path.times.size() || e_profile.size() != samples) {
    throw std::invalid_argument("path, grid and e profile lengths differ");
  }
  const double dt = validate_uniform_grid(path.times);
  double total = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    if (!(e_profile[k] > 0.0)) {
      throw std::invalid_argument("e profile must be positive");
    }
    const Vector qdot = first_derivative(path.q, k, dt);
    const Vector qddot = second_derivative(path.q, k, dt);
    const Vector residual =
        qddot - total_acceleration<double>(spec, path.q[k], qdot, path.times[k]);
    total += trapezoid_weight(k, samples, dt) * 0.5 * e_profile[k] *
             residual.squaredNorm();
  }
  return total;
}

namespace {

// Column storage of a phase path so single coordinates can be perturbed and
// the stencils applied directly.
struct PathColumns {
  std::vector<double> times;
  std::vector<Vector> q, p, v, pi;
  std::vector<double> e, pi_e, mu_e;
  double dt{0.0};

  explicit PathColumns(const PhasePath& path) : times(path.times) {
    const std::size_t samples = path.points.size();
    if (samples != path.times.size() || path.mu_e.size() != samples) {
      throw std::invalid_argument("phase path arrays differ in length");
    }
    dt = validate_uniform_grid(path.times);
    for (const auto& z : path.points) {
      q.push_back(z.q);
      p.push_back(z.p);
      v.push_back(z.v);
      pi.push_back(z.pi);
      e.push_back(z.e);
      pi_e.push_back(z.pi_e);
    }
    mu_e = path.mu_e;
  }

  std::size_t size() const { return times.size(); }
};

double integrand(const SystemSpec& spec, const PathColumns& c, std::size_t k) {
  const double e = c.e[k];
  if (e == 0.0) throw DomainError("first-order action undefined at e = 0");
  const Vector qdot = first_derivative(c.q, k, c.dt);
  const Vector vdot = first_derivative(c.v, k, c.dt);
  const double edot = first_derivative(c.e, k, c.dt);
  const Vector& p = c.p[k];
  const Vector& pi = c.pi[k];
  double value = p.dot(qdot) + pi.dot(vdot) + c.pi_e[k] * edot -
                 pi.squaredNorm() / (2.0 * e) - c.v[k].dot(p) -
                 c.mu_e[k] * c.pi_e[k];
  // On-surface samples (π = 0) never evaluate F.
  if (!pi.isZero(0.0)) {
    value -= pi.dot(total_acceleration<double>(spec, c.q[k], c.v[k], c.times[k]));
  }
  return value;
}

double action_of(const SystemSpec& spec, const PathColumns& c) {
  double total = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    total += trapezoid_weight(k, c.size(), c.dt) * integrand(spec, c, k);
  }
  return total;
}

// Sum of weighted integrands over the samples whose stencils touch sample k.
double local_action(const SystemSpec& spec, const PathColumns& c,
                    std::size_t k) {
  const std::size_t last = c.size() - 1;
  const std::size_t lo = k >= 2 ? k - 2 : 0;
  const std::size_t hi = std::min(last, k + 2);
  double total = 0.0;
  for (std::size_t j = lo; j <= hi; ++j) {
    total += trapezoid_weight(j, c.size(), c.dt) * integrand(spec, c, j);
  }
  return total;
}

}  // namespace

double first_order_action(const SystemSpec& spec, const PhasePath& path) {
  return action_of(spec, PathColumns(path));
}

StationarityReport stationarity_check(const SystemSpec& spec,
                                      const PhasePath& path,
                                      double perturbation_scale,
                                      double constant) {
  if (!(perturbation_scale > 0.0)) {
    throw std::invalid_argument("perturbation scale must be positive");
  }
  PathColumns c(path);
  const int n = spec.n;
  const double s = perturbation_scale;
  StationarityReport report;
  report.dt = c.dt;
  report.perturbation_scale = s;
  report.constant = constant;

  auto probe = [&](std::size_t k, double& slot, const std::string& name) {
    const double saved = slot;
    slot = saved + s;
    const double plus = local_action(spec, c, k);
    slot = saved - s;
    const double minus = local_action(spec, c, k);
    slot = saved;
    const double g = (plus - minus) / (2.0 * s) /
                     trapezoid_weight(k, c.size(), c.dt);
    if (std::abs(g) > report.max_gradient) {
      report.max_gradient = std::abs(g);
      report.worst_sample = k;
      report.worst_coordinate = name;
    }
  };

  for (std::size_t k = 1; k + 1 < c.size(); ++k) {
    for (int i = 0; i < n; ++i) {
      const std::string idx = std::to_string(i + 1);
      probe(k, c.q[k](i), "q" + idx);
      probe(k, c.p[k](i), "p" + idx);
      probe(k, c.v[k](i), "v" + idx);
      probe(k, c.pi[k](i), "pi" + idx);
    }
    probe(k, c.e[k], "e");
    probe(k, c.pi_e[k], "pi_e");
    probe(k, c.mu_e[k], "mu_e");
  }
  report.bound = constant * (c.dt * c.dt + s * s);
  report.pass = report.max_gradient <= report.bound;
  return report;
}

GaugeReport gauge_invariance_check(const SystemSpec& spec,
                                   const PhasePath& path,
                                   const std::vector<double>& alpha_profile,
                                   double amplitude, double constant) {
  if (alpha_profile.size() != path.points.size()) {
    throw std::invalid_argument("alpha profile must match the path grid");
  }
  const PathColumns base(path);
  GaugeReport report;
  report.dt = base.dt;
  report.amplitude = amplitude;
  report.constant = constant;
  report.endpoint_alpha =
      std::max(std::abs(alpha_profile.front()), std::abs(alpha_profile.back()));

  double magnitude = 0.0;
  for (std::size_t k = 0; k < base.size(); ++k) {
    magnitude += trapezoid_weight(k, base.size(), base.dt) *
                 std::abs(integrand(spec, base, k));
  }
  const double s0 = action_of(spec, base);

  for (double factor : {1.0, 0.5, 0.25}) {
    const double a = amplitude * factor;
    GaugeInput gauge;
    gauge.alpha.reserve(alpha_profile.size());
    for (double x : alpha_profile) gauge.alpha.push_back(a * x);
    const double s1 = first_order_action(spec, gauge_transform(path, gauge));
    report.records.push_back({a, s1 - s0});
  }

  if (amplitude != 0.0) {
    Eigen::Matrix<double, 3, 2> design;
    Eigen::Vector3d rhs;
    for (int r = 0; r < 3; ++r) {
      const double a = report.records[r].amplitude;
      design(r, 0) = a;
      design(r, 1) = a * a;
      rhs(r) = report.records[r].delta_action;
    }
    const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
    report.fitted_a = coef(0);
    report.fitted_b = coef(1);
    report.noise_floor = 100.0 * std::numeric_limits<double>::epsilon() *
                         magnitude / std::abs(amplitude);
  }
  report.bound = constant * base.dt * base.dt;
  report.pass = std::abs(report.fitted_a) <= report.bound;
  return report;
}

std::vector<double> bump_profile(const std::vector<double>& times) {
  std::vector<double> out(times.size(), 0.0);
  if (times.size() < 2) return out;
  const double t0 = times.front();
  const double span = times.back() - t0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double s = std::sin(std::numbers::pi * (times[k] - t0) / span);
    out[k] = s * s;
  }
  out.front() = 0.0;
  out.back() = 0.0;
  return out;
}

}  // namespace nhdyn
