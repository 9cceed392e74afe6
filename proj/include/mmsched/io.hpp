/*
 * Copyright (C) 2026 The mmsched Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
*/

#ifndef MMSCHED__IO_HPP
#define MMSCHED__IO_HPP

#include <mmsched/simulation.hpp>
#include <mmsched/uncertainty.hpp>

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace mmsched {

/// {"t_cur": .., "horizon": .., "lower": [[t_in, t_out], ..], "upper": [..]}
nlohmann::json to_json(const UncertaintySet& I);
UncertaintySet uncertainty_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AgentParams& q);
AgentParams params_from_json(const nlohmann::json& j);

/// A malformed configuration; `key` is the dotted path of the culprit.
class ConfigError : public std::invalid_argument
{
public:
  ConfigError(std::string key, const std::string& what);

  std::string key;
};

/// Scenario files. Required: "x0_init" ({"p", "v"}) and "agent1". Optional,
/// with ScenarioConfig defaults: params0, params1, assumed_params1,
/// decision_period, observation_period, observation_delay, first_decision,
/// horizon, policy, grid ({"nv", "np", "refine", "certificates"}), rng_seed,
/// priority_alpha, drop_probability, envelope_knots, record_decisions.
/// agent1 is {"kind": "arrival", "p1_init", "v_f"}, {"kind": "scripted",
/// "start", "controls": [[duration, accel], ..]} or {"kind": "randomized",
/// "seed"}. Unknown keys are rejected. Throws ConfigError; the result is
/// validated.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& cfg);

/// {"p1_lo", "p1_hi", "v_f_lo", "v_f_hi"}, all optional.
Sampler sampler_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Sampler& s);

} // namespace mmsched

#endif // MMSCHED__IO_HPP
