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

#include "nhdyn/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nhdyn {

void validate_config(const IntegratorConfig& cfg) {
  if (!(cfg.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(cfg.drift_tolerance > 0.0)) {
    throw std::invalid_argument("drift_tolerance must be positive");
  }
  if (cfg.record_every < 1) {
    throw std::invalid_argument("record_every must be at least 1");
  }
  if (cfg.method == Method::kRkf45) {
    if (!(cfg.atol > 0.0) || !(cfg.rtol > 0.0)) {
      throw std::invalid_argument("atol and rtol must be positive");
    }
    if (!(cfg.dt_min > 0.0) || !(cfg.dt_max >= cfg.dt_min)) {
      throw std::invalid_argument("need 0 < dt_min <= dt_max");
    }
  }
}

std::string to_string(Termination::Kind kind) {
  switch (kind) {
    case Termination::Kind::kCompleted: return "completed";
    case Termination::Kind::kEvent: return "event";
    case Termination::Kind::kError: return "error";
  }
  return "unknown";
}

double Trajectory::max_drift() const {
  double drift = 0.0;
  for (const auto& d : constraint_values) {
    if (d.size() > 0) drift = std::max(drift, d.lpNorm<Eigen::Infinity>());
  }
  return drift;
}

namespace {

using Rhs = std::function<Vector(double, const Vector&)>;

Vector rk4_step(const Rhs& f, double t, const Vector& y, double h) {
  const Vector k1 = f(t, y);
  const Vector k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const Vector k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const Vector k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct EmbeddedStep {
  Vector y;      // fifth-order solution
  double error;  // scaled max-norm error estimate
};

// Runge-Kutta-Fehlberg 4(5), propagating the fifth-order solution.
EmbeddedStep rkf45_step(const Rhs& f, double t, const Vector& y, double h,
                        double atol, double rtol) {
  const Vector k1 = f(t, y);
  const Vector k2 = f(t + h / 4.0, y + h * (k1 / 4.0));
  const Vector k3 = f(t + 3.0 * h / 8.0, y + h * (3.0 / 32.0 * k1 + 9.0 / 32.0 * k2));
  const Vector k4 = f(t + 12.0 * h / 13.0,
                      y + h * (1932.0 / 2197.0 * k1 - 7200.0 / 2197.0 * k2 +
                               7296.0 / 2197.0 * k3));
  const Vector k5 = f(t + h, y + h * (439.0 / 216.0 * k1 - 8.0 * k2 +
                                      3680.0 / 513.0 * k3 - 845.0 / 4104.0 * k4));
  const Vector k6 =
      f(t + h / 2.0, y + h * (-8.0 / 27.0 * k1 + 2.0 * k2 - 3544.0 / 2565.0 * k3 +
                              1859.0 / 4104.0 * k4 - 11.0 / 40.0 * k5));
  const Vector y5 = y + h * (16.0 / 135.0 * k1 + 6656.0 / 12825.0 * k3 +
                             28561.0 / 56430.0 * k4 - 9.0 / 50.0 * k5 +
                             2.0 / 55.0 * k6);
  const Vector y4 = y + h * (25.0 / 216.0 * k1 + 1408.0 / 2565.0 * k3 +
                             2197.0 / 4104.0 * k4 - 1.0 / 5.0 * k5);
  double err = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double scale = atol + rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
    err = std::max(err, std::abs(y5(i) - y4(i)) / scale);
  }
  return {y5, err};
}

struct Failure {
  std::string name;
  Termination::Kind kind;
  std::string message;
};

struct OdeProblem {
  Rhs rhs;
  std::function<void(double, Vector&)> post_step;  // may be empty
  // Returns the name of the first violated guard, if any.
  std::function<std::optional<std::string>(double, const Vector&)> check;
  std::function<void(double, const Vector&)> record;
};

class Driver {
 public:
  Driver(const OdeProblem& problem, const IntegratorConfig& cfg)
      : problem_(problem), cfg_(cfg) {}

  Termination run(const Vector& y0) {
    Vector y = y0;
    double t = 0.0;
    if (auto bad = safe_check(t, y)) {
      problem_.record(t, y);
      return {bad->kind, bad->name, t, bad->message};
    }
    problem_.record(t, y);
    return cfg_.method == Method::kRk4 ? run_rk4(y) : run_rkf45(y);
  }

 private:
  std::optional<Failure> safe_check(double t, const Vector& y) {
    try {
      if (auto name = problem_.check(t, y)) {
        return Failure{*name, Termination::Kind::kEvent, "guard " + *name};
      }
    } catch (const RegularityError& e) {
      return Failure{"gram_margin", Termination::Kind::kEvent, e.what()};
    } catch (const DomainError& e) {
      return Failure{"domain", Termination::Kind::kError, e.what()};
    }
    return std::nullopt;
  }

  Vector propagate(double t, const Vector& y, double h) {
    if (cfg_.method == Method::kRk4) return rk4_step(problem_.rhs, t, y, h);
    return rkf45_step(problem_.rhs, t, y, h, cfg_.atol, cfg_.rtol).y;
  }

  // One trial step of size h from (t, y): propagate, project, check.
  std::optional<Failure> attempt(double t, const Vector& y, double h,
                                 Vector& out) {
    try {
      out = propagate(t, y, h);
      if (problem_.post_step) problem_.post_step(t + h, out);
    } catch (const RegularityError& e) {
      return Failure{"gram_margin", Termination::Kind::kEvent, e.what()};
    } catch (const DomainError& e) {
      return Failure{"domain", Termination::Kind::kError, e.what()};
    } catch (const NoConvergence& e) {
      return Failure{"projection", Termination::Kind::kError, e.what()};
    }
    if (!out.allFinite()) {
      return Failure{"non_finite", Termination::Kind::kError,
                     "state became non-finite"};
    }
    return safe_check(t + h, out);
  }

  // Locates the failure inside (t, t + h] by bisection on the step size.
  Termination locate(double t, const Vector& y, double h, Failure failure) {
    double lo = 0.0;
    double hi = h;
    Vector y_lo = y;
    Vector trial;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      if (auto f = attempt(t, y, mid, trial)) {
        hi = mid;
        failure = *f;
      } else {
        lo = mid;
        y_lo = trial;
      }
    }
    if (lo > 0.0) problem_.record(t + lo, y_lo);
    return {failure.kind, failure.name, t + hi, failure.message};
  }

  Termination run_rk4(Vector y) {
    const long steps = std::max(
        1L, static_cast<long>(std::ceil(cfg_.t_end / cfg_.dt - 1e-9)));
    const double h = cfg_.t_end / static_cast<double>(steps);
    Vector next;
    for (long k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * h;
      const double t_next = k + 1 == steps ? cfg_.t_end : (k + 1) * h;
      if (auto f = attempt(t, y, t_next - t, next)) {
        return locate(t, y, t_next - t, *f);
      }
      y = next;
      if ((k + 1) % cfg_.record_every == 0 || k + 1 == steps) {
        problem_.record(t_next, y);
      }
    }
    return {Termination::Kind::kCompleted, "", cfg_.t_end, ""};
  }

  Termination run_rkf45(Vector y) {
    double t = 0.0;
    double h = std::min(cfg_.dt, cfg_.dt_max);
    long accepted = 0;
    Vector next;
    while (t < cfg_.t_end) {
      const bool last = t + h >= cfg_.t_end;
      const double step = last ? cfg_.t_end - t : h;
      EmbeddedStep trial;
      try {
        trial = rkf45_step(problem_.rhs, t, y, step, cfg_.atol, cfg_.rtol);
      } catch (const std::exception&) {
        // Let the bisection classify the failure.
        Failure f{"domain", Termination::Kind::kError, "step failed"};
        if (auto real = attempt(t, y, step, next)) f = *real;
        return locate(t, y, step, f);
      }
      const double grow =
          trial.error == 0.0 ? 4.0
                             : std::clamp(0.9 * std::pow(trial.error, -0.2), 0.1, 4.0);
      if (trial.error > 1.0 || !trial.y.allFinite()) {
        if (step <= cfg_.dt_min) {
          return {Termination::Kind::kError, "step_underflow", t,
                  "rkf45 step fell below dt_min"};
        }
        h = std::max(cfg_.dt_min, step * (trial.y.allFinite() ? grow : 0.1));
        continue;
      }
      if (auto f = attempt(t, y, step, next)) return locate(t, y, step, *f);
      y = next;
      t = last ? cfg_.t_end : t + step;
      ++accepted;
      if (accepted % cfg_.record_every == 0 || last) problem_.record(t, y);
      h = std::clamp(step * grow, cfg_.dt_min, cfg_.dt_max);
    }
    return {Termination::Kind::kCompleted, "", cfg_.t_end, ""};
  }

  const OdeProblem& problem_;
  const IntegratorConfig& cfg_;
};

}  // namespace

Trajectory integrate_second_order(const SystemSpec& spec, const Vector& q0,
                                  const Vector& v0, const IntegratorConfig& cfg,
                                  const std::vector<Guard>& guards) {
  validate_config(cfg);
  const int n = spec.n;
  if (q0.size() != n || v0.size() != n) {
    throw std::invalid_argument("initial state dimension does not match system");
  }
  const bool constrained = !spec.constraints.empty();
  if (constrained) {
    const double d0 =
        constraint_values(spec, q0, v0, 0.0).lpNorm<Eigen::Infinity>();
    if (d0 > 1e-10) {
      throw InitialConstraintViolation(
          "initial state violates the constraints (max |D| = " +
          std::to_string(d0) + "); project it first");
    }
  }

  Trajectory traj;
  traj.projection = cfg.projection;

  OdeProblem problem;
  problem.rhs = [&spec, n](double t, const Vector& y) {
    Vector dy(2 * n);
    dy.head(n) = y.tail(n);
    dy.tail(n) = total_acceleration<double>(spec, y.head(n), y.tail(n), t);
    return dy;
  };
  if (cfg.projection && constrained) {
    problem.post_step = [&spec, n](double t, Vector& y) {
      y.tail(n) = project_initial_state(spec, y.head(n), y.tail(n), t);
    };
  }
  const double gram_floor = 10.0 * spec.constraints.regularity_threshold;
  problem.check = [&, n](double t, const Vector& y) -> std::optional<std::string> {
    const Vector q = y.head(n);
    const Vector v = y.tail(n);
    if (constrained) {
      const auto r = compute_multipliers<double>(spec, q, v, t);
      if (r.min_eigenvalue <= gram_floor) return "gram_margin";
      if (!cfg.projection &&
          r.residuals.lpNorm<Eigen::Infinity>() > cfg.drift_tolerance) {
        return "drift";
      }
    }
    for (const auto& g : guards) {
      if (!(g.fn(q, v, t) > 0.0)) return g.name;
    }
    return std::nullopt;
  };
  problem.record = [&](double t, const Vector& y) {
    const Vector q = y.head(n);
    const Vector v = y.tail(n);
    traj.times.push_back(t);
    traj.q.push_back(q);
    traj.v.push_back(v);
    if (constrained) {
      try {
        const auto r = compute_multipliers<double>(spec, q, v, t);
        traj.constraint_values.push_back(r.residuals);
        traj.multipliers.push_back(r.h);
        traj.gram_min_eigenvalue.push_back(r.min_eigenvalue);
      } catch (const RegularityError& e) {
        traj.constraint_values.push_back(constraint_values(spec, q, v, t));
        traj.multipliers.push_back(
            Vector::Constant(spec.constraints.size(),
                             std::numeric_limits<double>::quiet_NaN()));
        traj.gram_min_eigenvalue.push_back(e.min_eigenvalue());
      }
    } else {
      traj.constraint_values.emplace_back();
      traj.multipliers.emplace_back();
      traj.gram_min_eigenvalue.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  };

  Vector y0(2 * n);
  y0 << q0, v0;
  Driver driver(problem, cfg);
  traj.termination = driver.run(y0);
  return traj;
}

ExtendedTrajectory integrate_hamiltonian(const SystemSpec& spec,
                                         const ExtendedPhasePoint& z0,
                                         const TimeFunction& mu_e,
                                         const IntegratorConfig& cfg) {
  validate_config(cfg);
  if (z0.n() != spec.n) {
    throw std::invalid_argument("phase point dimension does not match system");
  }
  if (z0.e == 0.0) throw DomainError("e(0) must be non-zero");
  const int n = spec.n;
  const double e_sign = z0.e > 0.0 ? 1.0 : -1.0;
  const PhaseLayout layout{n};

  ExtendedTrajectory traj;
  OdeProblem problem;
  problem.rhs = [&spec, &mu_e](double t, const Vector& z) {
    return hamiltonian_vector_field(spec, z, mu_e(t), t);
  };
  problem.check = [&](double, const Vector& z) -> std::optional<std::string> {
    if (!(e_sign * z(layout.e()) > 0.0)) return "e_zero";
    return std::nullopt;
  };
  problem.record = [&](double t, const Vector& z) {
    ExtendedPhasePoint point = from_vector(z, n);
    traj.times.push_back(t);
    traj.surface_residual.push_back(constraint_surface_residual(point));
    traj.points.push_back(std::move(point));
    traj.mu_e.push_back(mu_e(t));
  };

  Driver driver(problem, cfg);
  traj.termination = driver.run(to_vector(z0));
  return traj;
}

PhasePath to_phase_path(const ExtendedTrajectory& traj) {
  return {traj.times, traj.points, traj.mu_e};
}

}  // namespace nhdyn
