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

/**
 * @file cli.hpp
 * @brief Batch front-end: JSON run configs, trajectory CSV, JSON-lines
 * check reports.
 */

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nhdyn/integrate.hpp"
#include "nhdyn/scenarios.hpp"

namespace nhdyn::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitPass = 0,
  kExitCheckFailed = 1,
  kExitConfigError = 2,
  kExitRuntimeError = 3,
};

/// Invalid configuration, tagged with the offending field, e.g.
/// "system.masses[1]".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class CheckType {
  kDrift,
  kAnalyticCompare,
  kHamiltonianEquivalence,
  kActionStationarity,
  kGaugeInvariance,
};

std::string to_string(CheckType type);

/// One requested check. Fields not used by a type keep their defaults.
struct CheckSpec {
  CheckType type{CheckType::kDrift};
  std::string field;  // "checks[i]"
  double tolerance{0.0};
  double residual_tolerance{1e-9};
  std::string reference;  // analytic-compare: circle | heading | damped | friction_closed_form
  bool gauge_sweep{false};
  double perturbation_scale{1e-5};
  double amplitude{1e-5};
  double constant{0.0};
  double offshell_amplitude{0.1};
  std::string alpha{"bump"};  // bump | constant
  int levels{1};              // dt, dt/2, ... for the action checks
};

struct RunConfig {
  std::string system_name;  // scenario name, or "inline"
  Scenario scenario;
  SleighParams params;
  double c{0.0};
  double damped_omega{1.0};
  double damped_k{0.0};
  int damped_sign{-1};
  double e0{1.0};
  std::string mu_e{"0"};
  IntegratorConfig integrator;
  std::string csv_path;
  std::string report_path;
  std::vector<CheckSpec> checks;
  std::uint64_t hash{0};
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Parses and validates a JSON run config. Throws ConfigError.
RunConfig parse_run_config(const std::string& text);

/// Entry point; args excludes the program name. Returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace nhdyn::cli
