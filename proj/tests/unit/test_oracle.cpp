#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "vbuf/electrics.hpp"
#include "vbuf/oracle.hpp"
#include "vbuf/rng.hpp"

using namespace vbuf;
using oracle::build_topology;
using oracle::dp_buffer;
using oracle::DpConfig;
using oracle::RouteTree;

namespace {

Net random_small_net(Rng& rng, int sinks, double span,
                     double cap_lo = 6.0, double cap_hi = 30.0)
{
  Net net;
  net.id = "r" + std::to_string(rng.next_u64() % 100000);
  net.driver = fixtures::driver("d", rng.uniform(0, span),
                                rng.uniform(0, span),
                                rng.uniform(cap_lo, cap_hi),
                                static_cast<int>(rng.uniform_int(1, 4)),
                                rng.uniform(80, 200));
  for (int i = 0; i < sinks; ++i) {
    net.sinks.push_back(fixtures::sink("s" + std::to_string(i),
                                       rng.uniform(0, span),
                                       rng.uniform(0, span),
                                       rng.uniform(1.0, 4.0)));
  }
  return net;
}

}  // namespace

TEST_CASE("two-pin topology is a single L edge")
{
  Net net;
  net.id = "n";
  net.driver = fixtures::driver("d", 0, 0);
  net.sinks.push_back(fixtures::sink("s", 30, 40));
  const RouteTree t = build_topology(net);
  CHECK(t.total_length() == doctest::Approx(70.0));
}

TEST_CASE("collinear pins form a path of total span")
{
  Net net;
  net.id = "n";
  net.driver = fixtures::driver("d", 0, 0);
  net.sinks.push_back(fixtures::sink("a", 10, 0));
  net.sinks.push_back(fixtures::sink("b", 25, 0));
  net.sinks.push_back(fixtures::sink("c", 40, 0));
  const RouteTree t = build_topology(net);
  CHECK(t.total_length() == doctest::Approx(40.0));
}

TEST_CASE("topology length is permutation-invariant for distinct distances")
{
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    Net net = random_small_net(rng, 5, 80.0);
    const double len = build_topology(net).total_length();
    std::reverse(net.sinks.begin(), net.sinks.end());
    CHECK(build_topology(net).total_length() == doctest::Approx(len));
  }
}

TEST_CASE("clean single-sink net needs no buffers")
{
  const Technology tech = pipeline::default_technology();
  Net net;
  net.id = "n";
  net.driver = fixtures::driver("d", 0, 0, 50.0, 16);
  net.sinks.push_back(fixtures::sink("s", 8, 0, 2.0));
  const BufferedTree t = dp_buffer(net, tech.lib, tech.params);
  CHECK(t.buffer_count() == 0);
  CHECK(t.buffer_area() == 0.0);
  CHECK(!t.infeasible);
}

TEST_CASE("forced single-site repair inserts exactly one buffer")
{
  Technology tech = pipeline::default_technology();
  tech.lib.buffers.resize(1);  // only BUF_S2
  Net net;
  net.id = "n";
  net.driver = fixtures::driver("d", 0, 0, 8.0, 16);
  net.sinks.push_back(fixtures::sink("s", 20, 0, 6.0));
  // flat: cap = 1.1*20*0.2 + 6 = 10.4 > 8 -> must buffer
  REQUIRE(check_erc(net, tech.params).cap_violations == 1);

  DpConfig cfg;
  cfg.site_pitch = 10.0;  // one interior site at x = 10
  const BufferedTree t = dp_buffer(net, tech.lib, tech.params, cfg);
  CHECK(t.buffer_count() == 1);
  CHECK(!t.infeasible);
  CHECK(check_erc(t, tech.params).cap_violations == 0);
}

TEST_CASE("dp area matches brute force on small instances")
{
  Technology tech = pipeline::default_technology();
  tech.lib.buffers = {tech.lib.buffers[0], tech.lib.buffers[2]};
  Rng rng(202);
  int nontrivial = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int sinks = 1 + static_cast<int>(rng.uniform_int(0, 3));
    Net net = random_small_net(rng, sinks, 26.0, 3.0, 14.0);
    const RouteTree topo = build_topology(net);
    DpConfig cfg;
    // Alternate site plans; pitch keeps the candidate count at three or
    // fewer either way.
    cfg.site_at_edge_start = trial % 2 == 0;
    cfg.site_pitch = std::max(10.0, topo.total_length() / 3.5);
    if (oracle::candidate_sites(topo, cfg.site_pitch,
                                cfg.site_at_edge_start)
            .size()
        > 3) {
      continue;
    }
    const BufferedTree dp = dp_buffer(net, topo, tech.lib, tech.params, cfg);
    const BufferedTree bf =
        oracle::brute_force_buffer(net, topo, tech.lib, tech.params, cfg);
    CHECK(dp.infeasible == bf.infeasible);
    if (!bf.infeasible) {
      CHECK(dp.buffer_area() == doctest::Approx(bf.buffer_area()));
      nontrivial += bf.buffer_count() > 0 ? 1 : 0;
    }
  }
  CHECK(nontrivial > 5);  // the family must exercise real insertions
}

TEST_CASE("dominance pruning preserves the optimum")
{
  Technology tech = pipeline::default_technology();
  tech.lib.buffers = {tech.lib.buffers[0], tech.lib.buffers[3]};
  Rng rng(303);
  for (int trial = 0; trial < 25; ++trial) {
    const int sinks = 1 + static_cast<int>(rng.uniform_int(0, 3));
    Net net = random_small_net(rng, sinks, 24.0);
    DpConfig pruned;
    pruned.site_pitch = 9.0;
    DpConfig exhaustive = pruned;
    exhaustive.dominance_pruning = false;
    exhaustive.max_options = 100000;
    const BufferedTree a = dp_buffer(net, tech.lib, tech.params, pruned);
    const BufferedTree b = dp_buffer(net, tech.lib, tech.params, exhaustive);
    CHECK(a.buffer_area() == doctest::Approx(b.buffer_area()));
    CHECK(a.infeasible == b.infeasible);
  }
}

TEST_CASE("oracle trees are valid and deterministic")
{
  const Technology tech = pipeline::default_technology();
  Rng rng(404);
  for (int trial = 0; trial < 10; ++trial) {
    Net net = random_small_net(rng, 8, 120.0);
    net.driver.elec.max_cap = 12.0;
    const BufferedTree a = dp_buffer(net, tech.lib, tech.params);
    const BufferedTree b = dp_buffer(net, tech.lib, tech.params);
    CHECK(trees_isomorphic(a, b));
    CHECK_NOTHROW(tree_levels(a));
    // sinks remain leaves
    for (const Cell& c : a.nodes) {
      if (c.kind == CellKind::Sink) {
        CHECK(a.children_of(c.id).empty());
      }
    }
    // repair property: feasible trees carry no cap/fanout violations
    if (!a.infeasible) {
      const ErcReport r = check_erc(a, tech.params);
      CHECK(r.cap_violations == 0);
      CHECK(r.fanout_violations == 0);
    }
  }
}

TEST_CASE("unrepairable loads flag infeasible")
{
  const Technology tech = pipeline::default_technology();
  Net net;
  net.id = "fat";
  net.driver = fixtures::driver("d", 0, 0, 40.0, 12);
  net.sinks.push_back(fixtures::sink("s0", 30, 10, 2.0));
  net.sinks.push_back(fixtures::sink("s1", 35, -5, 300.0));
  const BufferedTree t = dp_buffer(net, tech.lib, tech.params);
  CHECK(t.infeasible);
  CHECK(check_erc(t, tech.params).cap_violations >= 1);
}

TEST_CASE("oracle annotations feed a consistent electrical state")
{
  const Technology tech = pipeline::default_technology();
  Rng rng(505);
  Net net = random_small_net(rng, 12, 100.0);
  net.driver.elec.max_cap = 15.0;
  BufferedTree t = dp_buffer(net, tech.lib, tech.params);
  REQUIRE(t.buffer_count() > 0);
  for (const Cell& c : t.nodes) {
    if (c.kind == CellKind::Buffer) {
      CHECK(c.elec.input_slew >= 0.0);
      if (!t.children_of(c.id).empty()) {
        CHECK(c.elec.output_cap > 0.0);
        CHECK(c.elec.output_slew > 0.0);
      }
    }
  }
}
