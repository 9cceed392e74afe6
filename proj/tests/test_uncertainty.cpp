#include <doctest.h>

#include <mmsched/io.hpp>
#include <mmsched/uncertainty.hpp>

#include "support.hpp"

#include <cmath>

using namespace mmsched;
using mmsched::test::nominal_params;
using mmsched::test::Rng;

namespace {

UncertaintySet random_observation_set(Rng& rng, const AgentParams& q, double t_cur,
  int knots = kDefaultEnvelopeKnots)
{
  const State x{rng.uniform(-200.0, -1.0), rng.uniform(0.0, q.v_max)};
  return from_observation(x, t_cur, t_cur, q, 1000.0, knots);
}

void check_gaps(const UncertaintySet& I)
{
  double g_lo = -kNever, g_hi = -kNever;
  for (int i = 0; i < 100; ++i)
  {
    const double t = I.tin_lo() + (I.tin_hi() - I.tin_lo())*i/99.0;
    const double lo = I.lower(t), hi = I.upper(t);
    REQUIRE(lo <= hi + 1e-9);
    // Zero gap only for pairs already clamped to the current time.
    if (t > I.t_cur())
      REQUIRE(lo - t > 0.0);
    else
      REQUIRE(lo - t >= 0.0);
    if (lo < I.horizon())
      REQUIRE(lo - t >= g_lo - 1e-9);
    if (hi < I.horizon())
      REQUIRE(hi - t >= g_hi - 1e-9);
    g_lo = lo - t;
    g_hi = hi - t;
  }
}

} // anonymous namespace

TEST_CASE("unconstrained set")
{
  const auto q = nominal_params();
  const auto I = unconstrained(0.0, 1000.0, q);
  CHECK(I.tin_lo() == 0.0);
  CHECK(I.tin_hi() == doctest::Approx(999.75));
  CHECK(I.lower(0.0) == doctest::Approx(0.25));
  CHECK(I.upper(0.0) == 1000.0);
  CHECK(I.upper(500.0) == 1000.0);
  I.check_invariants();

  const auto late = unconstrained(100.0, 1000.0, q);
  CHECK(late.tin_lo() == 100.0);
  CHECK(late.lower(100.0) == doctest::Approx(100.25));

  const auto W = occupied_window(I);
  CHECK(W.lo == 0.0);
  CHECK(W.hi == 1000.0);

  CHECK_THROWS_AS(unconstrained(0.0, 0.2, q), std::invalid_argument);
}

TEST_CASE("from_observation examples")
{
  const auto q = nominal_params();

  const auto I = from_observation({-160.0, 15.0}, 0.0, 0.0, q, 1000.0);
  CHECK(I.tin_lo() == doctest::Approx(8.2083).epsilon(1e-4));
  CHECK(I.tin_hi() == doctest::Approx(999.75));
  I.check_invariants();
  const auto W = occupied_window(I);
  CHECK(W.lo == doctest::Approx(8.2083).epsilon(1e-4));
  CHECK(W.hi == doctest::Approx(1000.0));

  const auto inside = from_observation({2.0, 0.0}, 0.0, 0.0, q, 1000.0);
  CHECK(inside.singleton_entry());
  CHECK(inside.tin_lo() == 0.0);
  CHECK(inside.lower(0.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(inside.upper(0.0) == doctest::Approx(1000.0));

  const auto passed = from_observation({7.0, 10.0}, 0.0, 3.0, q, 1000.0);
  CHECK(passed.singleton_entry());
  CHECK(passed.tin_lo() == 3.0);
  CHECK(passed.lower(3.0) == 3.0);
  CHECK(occupied_window(passed).empty());
}

TEST_CASE("from_observation end points match extremal trajectories")
{
  const auto q = nominal_params();
  Rng rng(11);
  for (int i = 0; i < 200; ++i)
  {
    const State x{rng.uniform(-200.0, -1.0), rng.uniform(0.0, q.v_max)};
    const auto I = from_observation(x, 0.0, 0.0, q, 1000.0);
    const auto minimal = from_observation(x, 0.0, 0.0, q, 1000.0, 2);
    const auto acc = acc_passage(x, 0.0, q);
    CHECK(I.tin_lo() == doctest::Approx(acc.t_in));
    CHECK(I.lower(I.tin_lo()) == doctest::Approx(acc.t_out));
    CHECK(minimal.tin_lo() == I.tin_lo());
    CHECK(minimal.tin_hi() == I.tin_hi());
    CHECK(minimal.lower(minimal.tin_lo()) == I.lower(I.tin_lo()));
    CHECK(minimal.upper(minimal.tin_hi()) == I.upper(I.tin_hi()));

    const auto dec = dec_passage(x, 0.0, q);
    if (is_finite(dec.t_in))
    {
      CHECK(I.tin_hi() == doctest::Approx(dec.t_in));
      CHECK(I.upper(I.tin_hi()) == doctest::Approx(std::min(dec.t_out, 1000.0)));
    }
    else
      CHECK(I.tin_hi() == doctest::Approx(1000.0 - q.length/q.v_max));
  }
}

TEST_CASE("from_observation gaps are positive and non-decreasing")
{
  const auto q = nominal_params();
  Rng rng(12);
  for (int i = 0; i < 300; ++i)
  {
    const double t_cur = rng.uniform(0.0, 5.0);
    const State x{rng.uniform(-200.0, -1.0), rng.uniform(0.0, q.v_max)};
    const double t_obs = t_cur - rng.uniform(0.0, 1.0);
    const auto I = from_observation(x, t_obs, t_cur, q, 1000.0);
    CAPTURE(x.p);
    CAPTURE(x.v);
    I.check_invariants(1e-9);
    check_gaps(I);
  }
}

TEST_CASE("from_observation contains random trajectories")
{
  const auto q = nominal_params();
  Rng rng(13);
  double worst = 0.0;
  for (int i = 0; i < 400; ++i)
  {
    const State x{rng.uniform(-120.0, -1.0), rng.uniform(0.0, q.v_max)};
    const auto I = from_observation(x, 0.0, 0.0, q, 1000.0);
    for (int j = 0; j < 25; ++j)
    {
      const auto tr = test::random_trajectory(rng, q, x);
      const auto w = entry_exit(tr, q.length);
      REQUIRE(is_finite(w.t_out));
      const double u = std::max(w.t_in, 0.0);
      const double o = std::max(w.t_out, 0.0);
      CAPTURE(x.p);
      CAPTURE(x.v);
      CAPTURE(u);
      CAPTURE(o);
      CHECK(I.contains(u, o, 1e-6));
      if (u >= I.tin_lo() && u <= I.tin_hi())
        worst = std::max(worst, I.lower(u) - o);
    }
  }
  MESSAGE("largest lower-envelope overshoot: " << worst);
}

TEST_CASE("rectify")
{
  SUBCASE("single point")
  {
    const auto I = rectify({{3.0, 5.0}}, 0.0, 100.0, 0.25);
    CHECK(I.singleton_entry());
    CHECK(I.lower(3.0) == 5.0);
    CHECK(I.upper(3.0) == 5.0);
  }
  SUBCASE("already valid input is unchanged")
  {
    const std::vector<Knot> pts{{1.0, 2.0}, {1.0, 4.0}, {2.0, 3.5}, {2.0, 6.0}, {4.0, 6.0}, {4.0, 9.0}};
    const auto I = rectify(pts, 0.0, 100.0, 0.25);
    CHECK(I.lower(1.0) == 2.0);
    CHECK(I.lower(2.0) == 3.5);
    CHECK(I.lower(4.0) == 6.0);
    CHECK(I.upper(1.0) == 4.0);
    CHECK(I.upper(2.0) == 6.0);
    CHECK(I.upper(4.0) == 9.0);
    I.check_invariants();
  }
  SUBCASE("disjoint clusters become connected")
  {
    const std::vector<Knot> pts{{1.0, 2.0}, {1.2, 2.5}, {10.0, 12.0}, {10.5, 11.0}};
    const auto I = rectify(pts, 0.0, 100.0, 0.25);
    CHECK(I.tin_lo() == 1.0);
    CHECK(I.tin_hi() == 10.5);
    I.check_invariants();
    for (const auto& p : pts)
      CHECK(I.contains(p.t_in, p.t_out));
    CHECK(I.contains(5.0, I.lower(5.0)));
  }
  SUBCASE("random clouds are covered")
  {
    Rng rng(14);
    for (int i = 0; i < 200; ++i)
    {
      std::vector<Knot> pts;
      const int n = rng.integer(1, 30);
      for (int j = 0; j < n; ++j)
      {
        const double u = rng.uniform(0.0, 50.0);
        pts.push_back({u, std::min(100.0, u + rng.uniform(0.0, 20.0))});
      }
      const auto I = rectify(pts, 0.0, 100.0, 0.25);
      I.check_invariants();
      for (const auto& p : pts)
        CHECK(I.contains(p.t_in, p.t_out));
    }
  }
  CHECK_THROWS(rectify({}, 0.0, 100.0, 0.25));
}

TEST_CASE("advance")
{
  const auto q = nominal_params();
  Rng rng(15);
  for (int i = 0; i < 200; ++i)
  {
    const auto I = random_observation_set(rng, q, 0.0);
    const auto same = advance(I, I.t_cur());
    CHECK(same.tin_lo() == I.tin_lo());
    CHECK(same.upper(same.tin_hi()) == I.upper(I.tin_hi()));

    const double a = rng.uniform(0.0, 60.0);
    const double b = rng.uniform(0.0, 60.0);
    const auto ab = advance(advance(I, a), std::max(a, b));
    const auto direct = advance(I, std::max(a, b));
    CHECK(ab.tin_lo() == doctest::Approx(direct.tin_lo()));
    CHECK(ab.tin_hi() == doctest::Approx(direct.tin_hi()));
    for (int j = 0; j < 20; ++j)
    {
      const double u = rng.uniform(direct.tin_lo(), direct.tin_hi());
      CHECK(ab.lower(u) == doctest::Approx(direct.lower(u)));
      CHECK(ab.upper(u) == doctest::Approx(direct.upper(u)));
    }
    direct.check_invariants();

    // Clamping maps every member of I into the advanced set.
    for (int j = 0; j < 20; ++j)
    {
      const double u = rng.uniform(I.tin_lo(), I.tin_hi());
      const double o = rng.uniform(I.lower(u), I.upper(u));
      const double t = std::max(a, b);
      CHECK(direct.contains(std::max(u, t), std::max(o, t)));
    }

    const auto W = occupied_window(direct);
    CHECK(W.lo >= std::max(a, b));
    CHECK(W.hi <= 1000.0);
  }

  const auto I = from_observation({-50.0, 10.0}, 0.0, 0.0, q, 1000.0);
  const auto done = advance(I, 1000.0);
  CHECK(done.singleton_entry());
  CHECK(done.lower(1000.0) == 1000.0);
  CHECK(done.upper(1000.0) == 1000.0);
  CHECK(occupied_window(done).empty());
  CHECK_THROWS(advance(I, -1.0));
}

TEST_CASE("reachable bounds lattice")
{
  const auto q = nominal_params();
  Rng rng(16);
  for (int i = 0; i < 100; ++i)
  {
    const auto I = advance(random_observation_set(rng, q, 0.0), rng.uniform(0.0, 20.0));
    const auto B = reachable_bounds(I);
    const auto sample = [&]
    {
      const double u = rng.uniform(B.tin_lo, B.tin_hi);
      return Knot{u, rng.uniform(B.lower_at(u), B.o_max)};
    };
    for (int j = 0; j < 50; ++j)
    {
      const Knot a = sample(), b = sample();
      REQUIRE(B.contains(a.t_in, a.t_out));
      const double o = std::max(a.t_out, b.t_out);
      const double u = std::min(a.t_in, b.t_in);
      CHECK(B.contains(a.t_in, o));
      CHECK(B.contains(b.t_in, o));
      CHECK(B.contains(u, a.t_out));
      CHECK(B.contains(u, b.t_out));
    }
    const auto s = summarize_bounds(I, I.t_cur());
    CHECK(s.u_lo == B.tin_lo);
    CHECK(s.u_hi == B.tin_hi);
    CHECK(s.o_lo == B.lower_at(B.tin_lo));
    CHECK(s.o_max == B.o_max);
  }

  const auto single = reachable_bounds(rectify({{3.0, 5.0}}, 0.0, 100.0, 0.25));
  CHECK(single.tin_lo == single.tin_hi);
  CHECK(single.o_max == 5.0);
  CHECK(single.lower_at(3.0) == 5.0);
}

TEST_CASE("summary after advance matches the advanced set")
{
  const auto q = nominal_params();
  Rng rng(17);
  for (int i = 0; i < 300; ++i)
  {
    const auto I = random_observation_set(rng, q, 0.0, 2);
    const double t = rng.uniform(0.0, 40.0);
    const auto s = summarize_bounds(I, t);
    const auto B = reachable_bounds(advance(I, t));
    CHECK(s.u_lo == doctest::Approx(B.tin_lo));
    CHECK(s.u_hi == doctest::Approx(B.tin_hi));
    CHECK(s.o_lo == doctest::Approx(B.lower_at(B.tin_lo)));
    CHECK(s.o_max == doctest::Approx(B.o_max));
  }
}

TEST_CASE("observation_bounds matches the envelope path")
{
  const auto q = nominal_params();
  Rng rng(29);
  const auto same = [](const BoundsSummary& a, const BoundsSummary& b)
  {
    CHECK(a.u_lo == doctest::Approx(b.u_lo).epsilon(1e-12));
    CHECK(a.u_hi == doctest::Approx(b.u_hi).epsilon(1e-12));
    CHECK(a.o_lo == doctest::Approx(b.o_lo).epsilon(1e-12));
    CHECK(a.o_max == doctest::Approx(b.o_max).epsilon(1e-12));
  };
  for (int i = 0; i < 400; ++i)
  {
    // Mostly ahead of the resource; some inside it or already past.
    const double p = i % 5 == 0 ? rng.uniform(-1.0, q.length + 2.0) : rng.uniform(-200.0, -1.0);
    const State x{p, rng.uniform(0.0, q.v_max)};
    const double t_obs = rng.uniform(0.0, 5.0);
    const double t_cur = t_obs + (i % 2 ? 0.0 : rng.uniform(0.0, 30.0));
    const double horizon = i % 7 == 0 ? 60.0 : 1000.0;
    CAPTURE(x);
    CAPTURE(t_cur);
    const auto fast = observation_bounds(x, t_obs, t_cur, q, horizon);
    for (int knots : {2, 128})
      same(fast, summarize_bounds(from_observation(x, t_obs, t_cur, q, horizon, knots), t_cur));

    // Advancing the summary equals summarizing the set later.
    const double t_later = t_cur + rng.uniform(0.0, 20.0);
    same(summarize_bounds(fast, t_later),
      summarize_bounds(from_observation(x, t_obs, t_cur, q, horizon), t_later));
  }
  same(unconstrained_bounds(3.0, 100.0, q), summarize_bounds(unconstrained(3.0, 100.0, q), 3.0));
}

TEST_CASE("occupied_window of a summary")
{
  const auto q = nominal_params();
  const auto I = from_observation({-60.0, 10.0}, 0.0, 0.0, q, 1000.0);
  const auto w = occupied_window(summarize_bounds(I, 0.0));
  CHECK(w.lo == doctest::Approx(occupied_window(I).lo));
  CHECK(w.hi == doctest::Approx(occupied_window(I).hi));
}

TEST_CASE("fuse")
{
  const auto q = nominal_params();
  const auto a = from_observation({-80.0, 12.0}, 0.0, 0.0, q, 1000.0);
  const auto b = unconstrained(0.0, 1000.0, q);
  const auto f = fuse(a, b);
  REQUIRE(f.has_value());
  f->check_invariants();
  CHECK(f->tin_lo() == doctest::Approx(a.tin_lo()));
  CHECK(f->tin_hi() == doctest::Approx(a.tin_hi()));
  CHECK(f->lower(10.0) == doctest::Approx(a.lower(10.0)));

  const auto c = rectify({{1.0, 2.0}}, 0.0, 1000.0, 0.25);
  CHECK_FALSE(fuse(a, c).has_value());
}

TEST_CASE("json round trip")
{
  const auto q = nominal_params();
  Rng rng(18);
  for (int i = 0; i < 20; ++i)
  {
    const auto I = advance(random_observation_set(rng, q, 0.0), rng.uniform(0.0, 20.0));
    const auto text = to_json(I).dump();
    const auto J = uncertainty_from_json(nlohmann::json::parse(text));
    CHECK(J.t_cur() == doctest::Approx(I.t_cur()).epsilon(1e-12));
    for (const auto pick : {&UncertaintySet::lower_envelope, &UncertaintySet::upper_envelope})
    {
      const auto& a = (I.*pick)().knots();
      const auto& b = (J.*pick)().knots();
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k)
      {
        CHECK(std::abs(a[k].t_in - b[k].t_in) < 1e-9);
        CHECK(std::abs(a[k].t_out - b[k].t_out) < 1e-9);
      }
    }
  }
}
