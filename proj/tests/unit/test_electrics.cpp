#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "vbuf/electrics.hpp"

using namespace vbuf;

TEST_CASE("hpwl basics")
{
  CHECK(hpwl(std::vector<Pt>{{0, 0}}) == 0.0);
  CHECK(hpwl(std::vector<Pt>{{0, 0}, {3, 4}}) == 7.0);
  CHECK(hpwl(std::vector<Pt>{{3, 4}, {0, 0}}) == 7.0);
  CHECK(hpwl(std::vector<Pt>{{1, 1}, {0, 0}, {3, 4}, {2, 2}}) == 7.0);
  CHECK_THROWS(hpwl(std::vector<Pt>{}));
}

TEST_CASE("output cap follows the wire-plus-loads formula")
{
  TechParams tech;
  tech.alpha = 1.0;
  tech.unit_wire_cap = 0.2;
  Cell head = fixtures::driver("d", 0, 0);
  Cell a = fixtures::sink("a", 50, 0, 2.0);
  Cell b = fixtures::sink("b", 25, 0, 2.0);
  const std::vector<const Cell*> kids{&a, &b};
  // W = 50, wire = 1.0 * 50 * 0.2 = 10, loads = 4
  CHECK(estimate_output_cap(head, kids, tech) == doctest::Approx(14.0));

  // co-located: wire term vanishes
  a.x = b.x = head.x;
  a.y = b.y = head.y;
  CHECK(estimate_output_cap(head, kids, tech) == doctest::Approx(4.0));

  // doubling alpha doubles only the wire term
  a.x = 50;
  b.x = 25;
  tech.alpha = 2.0;
  CHECK(estimate_output_cap(head, kids, tech) == doctest::Approx(24.0));
}

TEST_CASE("output slew is linear in its factors")
{
  TechParams tech;
  tech.alpha = 1.0;
  tech.unit_wire_res = 1.0;
  tech.beta = 1.0;
  tech.ohm_ff_to_ps = 1e-3;
  Cell head = fixtures::driver("d", 0, 0);
  head.elec.output_res = 100.0;
  // W = 0: pure driver resistance. 100 ohm * 14 fF = 1400 ohm*fF = 1.4 ps
  CHECK(estimate_output_slew(head, 14.0, 0.0, tech)
        == doctest::Approx(1.4));
  CHECK(estimate_output_slew(head, 0.0, 0.0, tech) == 0.0);
  tech.beta = 2.0;
  CHECK(estimate_output_slew(head, 14.0, 0.0, tech)
        == doctest::Approx(2.8));
}

TEST_CASE("check_erc thresholds")
{
  const Technology tech = pipeline::default_technology();
  Net net;
  net.id = "n";
  net.driver = fixtures::driver("d", 0, 0, 15.0, 20);
  net.sinks.push_back(fixtures::sink("a", 1, 0, 2.0));
  net.sinks.push_back(fixtures::sink("b", 2, 0, 2.0));
  // tiny net: cap ~ 4.44 fF, fanout 2 -> clean
  CHECK(check_erc(net, tech.params).total() == 0);

  net.driver.elec.max_cap = 4.0;
  const ErcReport r = check_erc(net, tech.params);
  CHECK(r.cap_violations == 1);
  CHECK(r.total() == 1);
}

TEST_CASE("a repaired tree clears violations its flat net had")
{
  const Technology tech = pipeline::default_technology();
  Net net;
  net.id = "n";
  net.driver = fixtures::driver("d", 0, 0, 20.0, 3);
  for (int i = 0; i < 6; ++i) {
    net.sinks.push_back(
        fixtures::sink("s" + std::to_string(i), 20 + i, 10, 3.0));
  }
  REQUIRE(check_erc(net, tech.params).total() > 0);

  // One mid-route buffer adopting all sinks fixes cap and fanout.
  BufferedTree t;
  t.net_id = net.id;
  t.nodes.push_back(net.driver);
  for (const Cell& s : net.sinks) {
    t.nodes.push_back(s);
  }
  t.nodes.push_back(make_buffer_cell("b", tech.lib.buffers[2], {21, 9}));
  for (const Cell& s : net.sinks) {
    t.parent[s.id] = "b";
  }
  t.parent["b"] = "d";
  const ErcReport r = check_erc(t, tech.params);
  CHECK(r.cap_violations == 0);
  CHECK(r.fanout_violations == 0);
}

TEST_CASE("penalty_erc is a ReLU of the excess")
{
  const Technology tech = pipeline::default_technology();
  BufferedTree t;
  t.net_id = "n";
  t.nodes.push_back(fixtures::driver("d", 0, 0, 15.0, 20));
  t.nodes.push_back(fixtures::sink("a", 1, 0, 2.0));
  t.nodes.push_back(fixtures::sink("b", 2, 0, 2.0));
  t.parent = {{"a", "d"}, {"b", "d"}};

  CHECK(penalty_erc(t, tech.params).total() == doctest::Approx(0.0));

  t.nodes[0].elec.max_cap = 3.0;  // cap ~= 4.44 -> excess ~= 1.44
  const ErcPenalty p = penalty_erc(t, tech.params);
  CHECK(p.cap == doctest::Approx(1.44).epsilon(1e-6));
  CHECK(p.fanout == 0.0);

  t.nodes[0].elec.max_fanout = 1;  // fanout 2 -> excess 1
  CHECK(penalty_erc(t, tech.params).fanout == doctest::Approx(1.0));
}

TEST_CASE("penalty_wire activates past the limit")
{
  Technology tech = pipeline::default_technology();
  tech.params.alpha = 1.0;
  tech.params.max_wirelength = 10.0;
  BufferedTree t;
  t.net_id = "n";
  t.nodes.push_back(fixtures::driver("d", 0, 0));
  t.nodes.push_back(fixtures::sink("a", 10, 0, 2.0));
  t.parent = {{"a", "d"}};
  CHECK(penalty_wire(t, tech.params) == doctest::Approx(0.0));
  t.nodes[1].x = 20;
  CHECK(penalty_wire(t, tech.params) == doctest::Approx(10.0));
  t.nodes[1].x = 0;
  CHECK(penalty_wire(t, tech.params) == doctest::Approx(0.0));
}

TEST_CASE("penalty_area boundary behavior")
{
  CHECK(penalty_area(2.0, 2.0, 1.0) == doctest::Approx(0.0));
  CHECK(penalty_area(2.0 * std::exp(1.0), 2.0, 1.0)
        == doctest::Approx(1.0));
  CHECK(penalty_area(1.0, 2.0, 1.0) == doctest::Approx(0.0));
  CHECK(penalty_area(0.0, 2.0, 1.0) == 0.0);
}

TEST_CASE("penalty gradients match central finite differences")
{
  Technology tech = pipeline::default_technology();
  tech.params.max_wirelength = 30.0;
  BufferedTree t;
  t.net_id = "n";
  t.nodes.push_back(fixtures::driver("d", 0, 0, 3.0, 20));
  t.nodes.push_back(fixtures::sink("a", 31.0, 7.0, 15.0));
  t.nodes.push_back(fixtures::sink("b", 25.0, -11.0, 14.0));
  t.nodes.push_back(
      make_buffer_cell("u", tech.lib.buffers[0], {13.0, 3.0}));
  t.parent = {{"a", "u"}, {"b", "u"}, {"u", "d"}};

  // Both stages sit above their limits, away from kinks and ties.
  REQUIRE(penalty_erc(t, tech.params).cap > 0.1);
  REQUIRE(penalty_wire(t, tech.params) > 0.1);

  const PenaltyGradients g = penalty_gradients(t, tech.params);
  const double h = 1e-5;
  for (const std::string id : {"u", "a", "b"}) {
    for (int axis = 0; axis < 2; ++axis) {
      auto probe = [&](double delta) {
        BufferedTree tt = t;
        Cell* c = tt.find(id);
        (axis == 0 ? c->x : c->y) += delta;
        return std::pair<double, double>{penalty_erc(tt, tech.params).cap,
                                         penalty_wire(tt, tech.params)};
      };
      const auto [cap_p, wire_p] = probe(h);
      const auto [cap_m, wire_m] = probe(-h);
      const double fd_cap = (cap_p - cap_m) / (2 * h);
      const double fd_wire = (wire_p - wire_m) / (2 * h);
      const Pt gc = g.d_cap.at(id);
      const Pt gw = g.d_wire.at(id);
      const double an_cap = axis == 0 ? gc.x : gc.y;
      const double an_wire = axis == 0 ? gw.x : gw.y;
      CHECK(an_cap == doctest::Approx(fd_cap).epsilon(1e-4));
      CHECK(an_wire == doctest::Approx(fd_wire).epsilon(1e-4));
    }
  }
}

TEST_CASE("erc report serializes")
{
  const Technology tech = pipeline::default_technology();
  Net net = fixtures::simple_net(2);
  net.driver.elec.max_cap = 1.0;
  const std::string js = check_erc(net, tech.params).to_json();
  CHECK(js.find("cap_violations") != std::string::npos);
}
