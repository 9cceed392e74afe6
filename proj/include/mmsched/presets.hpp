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

#ifndef MMSCHED__PRESETS_HPP
#define MMSCHED__PRESETS_HPP

// Built-in experiment setups, named fig5 .. fig12.

#include <mmsched/simulation.hpp>

#include <string>
#include <vector>

namespace mmsched {

/// n evenly spaced values on [lo, hi]; n == 1 gives lo.
struct Axis1D
{
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;

  double at(int i) const { return n > 1 ? lo + (hi - lo)*i/(n - 1) : lo; }
  std::vector<double> values() const;
};

/// value_uo over a (u, o) grid for one target state.
struct WindowSurfacePreset
{
  AgentParams params0;
  State x_tar{-40.0, 15.0};
  double t_next = 0.0;
  Axis1D u{0.0, 5.0, 50};
  Axis1D o{0.0, 10.0, 50};
};

/// v_max over a target grid, one surface per observed agent-1 position.
struct TargetSurfacePreset
{
  AgentParams params0;
  AgentParams params1;
  double t_k = 0.0;
  double t_k1 = 0.01;
  double v1 = 15.0;
  std::vector<double> p1_values{-100.0, -80.0, -60.0, -40.0};
  Axis1D p_tar{-150.0, 0.0, 151};
  Axis1D v_tar{0.0, 20.0, 81};
  double horizon = 1000.0;
};

/// A family of sweeps: one curve per curve value, each sweeping `axis`.
struct SweepPreset
{
  ScenarioConfig base;
  SweepAxis axis = SweepAxis::kP1Init;
  std::vector<double> values;
  /// Curves vary these (axis, value) pairs one at a time; the first curve is
  /// always the unmodified base.
  std::vector<std::pair<SweepAxis, double>> curves;
};

struct BatchPreset
{
  ScenarioConfig base;
  std::vector<PolicySpec> policies;
  std::size_t n = 100000;
  Sampler sampler;
  std::uint64_t seed = 1;
};

/// The crossing scenario: agent 0 at <-200, 15>, agent 1 at -160 cruising at
/// 15 and passing at v_f = 15, periods 0.01, minimax.
ScenarioConfig crossing_scenario();

/// minimax plus Queueing(0, 5, 10) and Following(0, 5, 10).
std::vector<PolicySpec> compared_policies();

WindowSurfacePreset fig5_preset();
TargetSurfacePreset fig6_preset();
ScenarioConfig fig7_preset();
BatchPreset fig8_preset();
SweepPreset fig9_preset();
SweepPreset fig10_preset();
SweepPreset fig11_preset();
SweepPreset fig12_preset();

/// "fig5" .. "fig12".
std::vector<std::string> preset_names();

/// The scenario behind a run, batch or sweep preset. Throws
/// std::invalid_argument for unknown names and for the surface presets.
ScenarioConfig scenario_preset(const std::string& name);

} // namespace mmsched

#endif // MMSCHED__PRESETS_HPP
