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

#include <mmsched/io.hpp>

#include <set>

namespace mmsched {

namespace {

nlohmann::json knots_json(const Envelope& e)
{
  auto arr = nlohmann::json::array();
  for (const auto& k : e.knots())
    arr.push_back({k.t_in, k.t_out});
  return arr;
}

Envelope knots_from(const nlohmann::json& arr)
{
  std::vector<Knot> knots;
  for (const auto& k : arr)
    knots.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
  return Envelope(std::move(knots));
}

// The first single-quoted name in a validation message.
std::string quoted_name(const std::string& what)
{
  const auto a = what.find('\'');
  const auto b = a == std::string::npos ? a : what.find('\'', a + 1);
  return b == std::string::npos ? std::string() : what.substr(a + 1, b - a - 1);
}

std::string join(const std::string& path, const std::string& key)
{
  return path.empty() ? key : path + "." + key;
}

// Reads an object's keys by name and rejects the ones nobody asked for.
class Reader
{
public:
  Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object())
      throw ConfigError(path_, "expected an object");
  }

  const nlohmann::json* find(const std::string& key)
  {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const nlohmann::json& require(const std::string& key)
  {
    const auto* v = find(key);
    if (!v)
      throw ConfigError(join(path_, key), "missing required key");
    return *v;
  }

  double number(const std::string& key, double fallback)
  {
    const auto* v = find(key);
    return v ? as_number(*v, join(path_, key)) : fallback;
  }

  bool boolean(const std::string& key, bool fallback)
  {
    const auto* v = find(key);
    if (!v)
      return fallback;
    if (!v->is_boolean())
      throw ConfigError(join(path_, key), "expected true or false");
    return v->get<bool>();
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback)
  {
    const auto* v = find(key);
    if (!v)
      return fallback;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
      throw ConfigError(join(path_, key), "expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void finish() const
  {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key))
        throw ConfigError(join(path_, key), "unknown key");
  }

  static double as_number(const nlohmann::json& v, const std::string& path)
  {
    if (!v.is_number())
      throw ConfigError(path, "expected a number");
    return v.get<double>();
  }

private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

AgentParams read_params(const nlohmann::json& j, const std::string& path)
{
  Reader r(j, path);
  AgentParams q;
  q.v_max = r.number("v_max", q.v_max);
  q.a_dec = r.number("a_dec", q.a_dec);
  q.a_acc = r.number("a_acc", q.a_acc);
  q.length = r.number("length", q.length);
  r.finish();
  try
  {
    q.validate();
  }
  catch (const std::invalid_argument& e)
  {
    throw ConfigError(join(path, quoted_name(e.what())), e.what());
  }
  return q;
}

State read_state(const nlohmann::json& j, const std::string& path)
{
  Reader r(j, path);
  State x{Reader::as_number(r.require("p"), r.path("p")),
          Reader::as_number(r.require("v"), r.path("v"))};
  r.finish();
  return x;
}

Agent1Profile read_agent1(const nlohmann::json& j, const std::string& path)
{
  Reader r(j, path);
  const auto& kind = r.require("kind");
  Agent1Profile a;
  if (kind == "arrival")
    a = Agent1Profile::arrival(
      Reader::as_number(r.require("p1_init"), r.path("p1_init")),
      Reader::as_number(r.require("v_f"), r.path("v_f")));
  else if (kind == "scripted")
  {
    std::vector<Segment> controls;
    if (const auto* c = r.find("controls"))
    {
      if (!c->is_array())
        throw ConfigError(r.path("controls"), "expected [[duration, accel], ..]");
      for (std::size_t i = 0; i < c->size(); ++i)
      {
        const auto& seg = (*c)[i];
        const auto at = r.path("controls") + "[" + std::to_string(i) + "]";
        if (!seg.is_array() || seg.size() != 2)
          throw ConfigError(at, "expected [duration, accel]");
        controls.push_back({Reader::as_number(seg[0], at), Reader::as_number(seg[1], at)});
        if (!(controls.back().duration >= 0.0))
          throw ConfigError(at, "negative duration");
      }
    }
    a = Agent1Profile::scripted(read_state(r.require("start"), r.path("start")),
                                std::move(controls));
  }
  else if (kind == "randomized")
    a = Agent1Profile::randomized(r.count("seed", 0));
  else
    throw ConfigError(r.path("kind"), "expected \"arrival\", \"scripted\" or \"randomized\"");
  r.finish();
  return a;
}

nlohmann::json state_json(State x)
{
  return {{"p", x.p}, {"v", x.v}};
}

} // anonymous namespace

ConfigError::ConfigError(std::string key_, const std::string& what)
  : std::invalid_argument(key_.empty() ? what : "'" + key_ + "': " + what)
  , key(std::move(key_))
{
}

ScenarioConfig scenario_from_json(const nlohmann::json& j)
{
  Reader r(j, "");
  ScenarioConfig c;
  if (const auto* v = r.find("params0"))
    c.params0 = read_params(*v, "params0");
  if (const auto* v = r.find("params1"))
    c.params1 = read_params(*v, "params1");
  if (const auto* v = r.find("assumed_params1"))
    c.assumed_params1 = read_params(*v, "assumed_params1");
  c.x0_init = read_state(r.require("x0_init"), "x0_init");
  c.agent1 = read_agent1(r.require("agent1"), "agent1");
  c.decision_period = r.number("decision_period", c.decision_period);
  c.observation_period = r.number("observation_period", c.observation_period);
  c.observation_delay = r.number("observation_delay", c.observation_delay);
  c.first_decision = r.number("first_decision", c.first_decision);
  c.horizon = r.number("horizon", c.horizon);
  if (const auto* v = r.find("policy"))
  {
    if (!v->is_string())
      throw ConfigError("policy", "expected a string");
    try
    {
      c.policy = PolicySpec::parse(v->get<std::string>());
    }
    catch (const std::invalid_argument& e)
    {
      throw ConfigError("policy", e.what());
    }
  }
  if (const auto* v = r.find("grid"))
  {
    Reader g(*v, "grid");
    c.grid.nv = static_cast<int>(g.count("nv", static_cast<std::uint64_t>(c.grid.nv)));
    c.grid.np = static_cast<int>(g.count("np", static_cast<std::uint64_t>(c.grid.np)));
    c.grid.refine = static_cast<int>(g.count("refine", static_cast<std::uint64_t>(c.grid.refine)));
    c.grid.certificates = g.boolean("certificates", c.grid.certificates);
    g.finish();
  }
  c.rng_seed = r.count("rng_seed", c.rng_seed);
  c.priority_alpha = r.number("priority_alpha", c.priority_alpha);
  c.drop_probability = r.number("drop_probability", c.drop_probability);
  c.envelope_knots = static_cast<int>(r.count("envelope_knots", 0));
  c.record_decisions = r.boolean("record_decisions", c.record_decisions);
  r.finish();
  try
  {
    c.validate();
  }
  catch (const std::invalid_argument& e)
  {
    throw ConfigError(quoted_name(e.what()), e.what());
  }
  return c;
}

nlohmann::json to_json(const ScenarioConfig& c)
{
  nlohmann::json a1 = {{"kind", to_string(c.agent1.kind)}};
  switch (c.agent1.kind)
  {
    case Agent1Profile::Kind::kArrival:
      a1["p1_init"] = c.agent1.p1_init;
      a1["v_f"] = c.agent1.v_f;
      break;
    case Agent1Profile::Kind::kScripted:
    {
      a1["start"] = state_json(c.agent1.start);
      auto controls = nlohmann::json::array();
      for (const auto& s : c.agent1.controls)
        controls.push_back({s.duration, s.accel});
      a1["controls"] = controls;
      break;
    }
    case Agent1Profile::Kind::kRandomized:
      a1["seed"] = c.agent1.seed;
      break;
  }
  nlohmann::json j = {
    {"params0", to_json(c.params0)},
    {"params1", to_json(c.params1)},
    {"x0_init", state_json(c.x0_init)},
    {"agent1", a1},
    {"decision_period", c.decision_period},
    {"observation_period", c.observation_period},
    {"observation_delay", c.observation_delay},
    {"first_decision", c.first_decision},
    {"horizon", c.horizon},
    {"policy", c.policy.name()},
    {"grid", {{"nv", c.grid.nv}, {"np", c.grid.np}, {"refine", c.grid.refine},
              {"certificates", c.grid.certificates}}},
    {"rng_seed", c.rng_seed},
    {"priority_alpha", c.priority_alpha},
    {"drop_probability", c.drop_probability},
    {"envelope_knots", c.envelope_knots},
    {"record_decisions", c.record_decisions},
  };
  if (c.assumed_params1)
    j["assumed_params1"] = to_json(*c.assumed_params1);
  return j;
}

Sampler sampler_from_json(const nlohmann::json& j)
{
  Reader r(j, "sampler");
  Sampler s;
  s.p1_lo = r.number("p1_lo", s.p1_lo);
  s.p1_hi = r.number("p1_hi", s.p1_hi);
  s.v_f_lo = r.number("v_f_lo", s.v_f_lo);
  s.v_f_hi = r.number("v_f_hi", s.v_f_hi);
  r.finish();
  if (!(s.p1_lo <= s.p1_hi && s.p1_hi <= 0.0))
    throw ConfigError("sampler.p1_hi", "need p1_lo <= p1_hi <= 0");
  if (!(0.0 <= s.v_f_lo && s.v_f_lo <= s.v_f_hi))
    throw ConfigError("sampler.v_f_hi", "need 0 <= v_f_lo <= v_f_hi");
  return s;
}

nlohmann::json to_json(const Sampler& s)
{
  return {{"p1_lo", s.p1_lo}, {"p1_hi", s.p1_hi}, {"v_f_lo", s.v_f_lo}, {"v_f_hi", s.v_f_hi}};
}

nlohmann::json to_json(const UncertaintySet& I)
{
  return {
    {"t_cur", I.t_cur()},
    {"horizon", I.horizon()},
    {"lower", knots_json(I.lower_envelope())},
    {"upper", knots_json(I.upper_envelope())},
  };
}

UncertaintySet uncertainty_from_json(const nlohmann::json& j)
{
  return UncertaintySet(j.at("t_cur").get<double>(), j.at("horizon").get<double>(),
    knots_from(j.at("lower")), knots_from(j.at("upper")));
}

nlohmann::json to_json(const AgentParams& q)
{
  return {
    {"v_max", q.v_max},
    {"a_dec", q.a_dec},
    {"a_acc", q.a_acc},
    {"length", q.length},
  };
}

AgentParams params_from_json(const nlohmann::json& j)
{
  AgentParams q;
  q.v_max = j.value("v_max", q.v_max);
  q.a_dec = j.value("a_dec", q.a_dec);
  q.a_acc = j.value("a_acc", q.a_acc);
  q.length = j.value("length", q.length);
  q.validate();
  return q;
}

} // namespace mmsched
