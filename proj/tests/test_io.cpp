#include <doctest.h>

#include <mmsched/io.hpp>
#include <mmsched/presets.hpp>

using namespace mmsched;
using nlohmann::json;

namespace {

json minimal()
{
  return json::parse(R"({
    "x0_init": {"p": -200, "v": 15},
    "agent1": {"kind": "arrival", "p1_init": -160, "v_f": 15}
  })");
}

std::string error_key(const json& j)
{
  try
  {
    scenario_from_json(j);
  }
  catch (const ConfigError& e)
  {
    return e.key;
  }
  return "<none>";
}

} // anonymous namespace

TEST_CASE("minimal scenario takes the defaults")
{
  const auto c = scenario_from_json(minimal());
  const ScenarioConfig d;
  CHECK(c.x0_init.p == -200.0);
  CHECK(c.agent1.kind == Agent1Profile::Kind::kArrival);
  CHECK(c.agent1.p1_init == -160.0);
  CHECK(c.decision_period == d.decision_period);
  CHECK(c.params0.a_dec == d.params0.a_dec);
  CHECK(c.grid.nv == d.grid.nv);
  CHECK(c.policy.kind == PolicySpec::Kind::kMinimax);
  CHECK_FALSE(c.assumed_params1.has_value());
}

TEST_CASE("scenario round trip")
{
  auto c = crossing_scenario();
  c.policy = PolicySpec::parse("following:5");
  c.observation_delay = 0.05;
  c.grid = {5, 7, 2, false};
  c.assumed_params1 = AgentParams{20.0, 3.0, 3.0, 6.0};
  c.agent1 = Agent1Profile::scripted({-120.0, 10.0}, {{1.5, -2.0}, {3.0, 3.0}});
  const auto back = scenario_from_json(json::parse(to_json(c).dump()));
  CHECK(to_json(back) == to_json(c));
  REQUIRE(back.agent1.controls.size() == 2);
  CHECK(back.agent1.controls[1].accel == 3.0);
  CHECK(back.assumed_params1->length == 6.0);

  c.agent1 = Agent1Profile::randomized(99);
  CHECK(scenario_from_json(to_json(c)).agent1.seed == 99);
}

TEST_CASE("scenario errors name the key")
{
  auto j = minimal();
  j.erase("agent1");
  CHECK(error_key(j) == "agent1");

  j = minimal();
  j["agent1"].erase("v_f");
  CHECK(error_key(j) == "agent1.v_f");

  j = minimal();
  j["params0"] = {{"a_dec", -1.0}};
  CHECK(error_key(j) == "params0.a_dec");

  j = minimal();
  j["params1"] = {{"accel", 3.0}};
  CHECK(error_key(j) == "params1.accel");

  j = minimal();
  j["decision_period"] = "fast";
  CHECK(error_key(j) == "decision_period");

  j = minimal();
  j["decision_period"] = 0.0;
  CHECK(error_key(j) == "decision_period");

  j = minimal();
  j["policy"] = "greedy";
  CHECK(error_key(j) == "policy");

  j = minimal();
  j["agent1"]["kind"] = "teleport";
  CHECK(error_key(j) == "agent1.kind");

  j = minimal();
  j["agent1"] = {{"kind", "scripted"}, {"start", {{"p", -50}, {"v", 5}}},
                 {"controls", {{1.0}}}};
  CHECK(error_key(j) == "agent1.controls[0]");

  j = minimal();
  j["x0_init"]["v"] = 25.0;
  CHECK(error_key(j) == "x0_init");

  j = minimal();
  j["grid"] = {{"nv", -3}};
  CHECK(error_key(j) == "grid.nv");

  CHECK(error_key(json::array()) == "");
}

TEST_CASE("sampler keys")
{
  const auto s = sampler_from_json(json::parse(R"({"p1_lo": -150, "v_f_hi": 10})"));
  CHECK(s.p1_lo == -150.0);
  CHECK(s.p1_hi == Sampler{}.p1_hi);
  CHECK(s.v_f_hi == 10.0);
  CHECK_THROWS_AS(sampler_from_json(json::parse(R"({"p1_hi": 5})")), ConfigError);
  CHECK_THROWS_AS(sampler_from_json(json::parse(R"({"n": 5})")), ConfigError);
}
