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

#include <mmsched/presets.hpp>

#include <stdexcept>

namespace mmsched {

std::vector<double> Axis1D::values() const
{
  std::vector<double> out;
  for (int i = 0; i < n; ++i)
    out.push_back(at(i));
  return out;
}

ScenarioConfig crossing_scenario()
{
  ScenarioConfig c;
  c.params0 = AgentParams{20.0, 4.0, 3.0, 5.0};
  c.params1 = c.params0;
  c.x0_init = {-200.0, 15.0};
  c.decision_period = 0.01;
  c.observation_period = 0.01;
  c.agent1 = Agent1Profile::arrival(-160.0, 15.0);
  c.policy = PolicySpec::parse("minimax");
  return c;
}

std::vector<PolicySpec> compared_policies()
{
  std::vector<PolicySpec> out;
  for (const char* name : {"minimax", "queueing:0", "queueing:5", "queueing:10",
                           "following:0", "following:5", "following:10"})
    out.push_back(PolicySpec::parse(name));
  return out;
}

WindowSurfacePreset fig5_preset()
{
  return WindowSurfacePreset{};
}

TargetSurfacePreset fig6_preset()
{
  return TargetSurfacePreset{};
}

ScenarioConfig fig7_preset()
{
  return crossing_scenario();
}

BatchPreset fig8_preset()
{
  BatchPreset b;
  b.base = crossing_scenario();
  b.policies = compared_policies();
  return b;
}

SweepPreset fig9_preset()
{
  SweepPreset s;
  s.base = crossing_scenario();
  s.base.observation_period = 0.1;
  s.axis = SweepAxis::kDecisionPeriod;
  s.values = {0.01, 0.05, 0.1, 0.3};
  return s;
}

SweepPreset fig10_preset()
{
  SweepPreset s;
  s.base = crossing_scenario();
  s.base.decision_period = 0.1;
  s.axis = SweepAxis::kObservationPeriod;
  s.values = {0.01, 0.05, 0.1, 0.3};
  return s;
}

SweepPreset fig11_preset()
{
  SweepPreset s;
  s.base = crossing_scenario();
  s.axis = SweepAxis::kP1Init;
  s.values = Axis1D{-200.0, -100.0, 101}.values();
  s.curves = {{SweepAxis::kA0Dec, 2.0}, {SweepAxis::kA0Dec, 6.0},
              {SweepAxis::kA0Acc, 2.0}, {SweepAxis::kA0Acc, 4.0}};
  return s;
}

SweepPreset fig12_preset()
{
  SweepPreset s = fig11_preset();
  s.curves = {{SweepAxis::kA1Dec, 2.0}, {SweepAxis::kA1Dec, 6.0},
              {SweepAxis::kA1Acc, 2.0}, {SweepAxis::kA1Acc, 4.0}};
  return s;
}

std::vector<std::string> preset_names()
{
  return {"fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12"};
}

ScenarioConfig scenario_preset(const std::string& name)
{
  if (name == "fig7")
    return fig7_preset();
  if (name == "fig8")
    return fig8_preset().base;
  if (name == "fig9")
    return fig9_preset().base;
  if (name == "fig10")
    return fig10_preset().base;
  if (name == "fig11")
    return fig11_preset().base;
  if (name == "fig12")
    return fig12_preset().base;
  if (name == "fig5" || name == "fig6")
    throw std::invalid_argument("preset '" + name + "' is a value surface, not a scenario");
  throw std::invalid_argument("unknown preset '" + name + "'");
}

} // namespace mmsched
