#pragma once

#include "vbuf/netlist.hpp"
#include "vbuf/pipeline.hpp"
#include "vbuf/tree.hpp"

// Shared hand-built inputs for the unit suites.
namespace fixtures {

inline vbuf::Cell driver(const std::string& id, double x, double y,
                         double max_cap = 50.0, int max_fanout = 16,
                         double out_res = 150.0)
{
  vbuf::Cell c;
  c.id = id;
  c.kind = vbuf::CellKind::Driver;
  c.x = x;
  c.y = y;
  c.elec.max_cap = max_cap;
  c.elec.max_fanout = max_fanout;
  c.elec.output_res = out_res;
  c.elec.output_slew = 10.0;
  return c;
}

inline vbuf::Cell sink(const std::string& id, double x, double y,
                       double in_cap = 2.0)
{
  vbuf::Cell c;
  c.id = id;
  c.kind = vbuf::CellKind::Sink;
  c.x = x;
  c.y = y;
  c.elec.input_cap = in_cap;
  return c;
}

inline vbuf::Net simple_net(int sinks = 3)
{
  vbuf::Net net;
  net.id = "n0";
  net.driver = driver("d", 0.0, 0.0);
  for (int i = 0; i < sinks; ++i) {
    net.sinks.push_back(
        sink("s" + std::to_string(i), 10.0 * (i + 1), 5.0 * i));
  }
  return net;
}

// The two-level reference tree: driver v10 over sinks v0..v5; buffers
// v6 (v0, v1), v7 (v2), v8 (v3, v4) at level 1; v9 over v6..v8 at level
// 2; v5 stays on the driver.
inline vbuf::BufferedTree reference_tree()
{
  using namespace vbuf;
  const Technology tech = pipeline::default_technology();
  const BufferSpec& spec = tech.lib.buffers[1];

  BufferedTree t;
  t.net_id = "fig";
  t.nodes.push_back(driver("v10", 50.0, 0.0));
  t.nodes.push_back(sink("v0", 0.0, 40.0));
  t.nodes.push_back(sink("v1", 6.0, 44.0));
  t.nodes.push_back(sink("v2", 30.0, 52.0));
  t.nodes.push_back(sink("v3", 60.0, 47.0));
  t.nodes.push_back(sink("v4", 68.0, 42.0));
  t.nodes.push_back(sink("v5", 90.0, 8.0));
  t.nodes.push_back(make_buffer_cell("v6", spec, {4.0, 36.0}));
  t.nodes.push_back(make_buffer_cell("v7", spec, {31.0, 44.0}));
  t.nodes.push_back(make_buffer_cell("v8", spec, {63.0, 40.0}));
  t.nodes.push_back(make_buffer_cell("v9", spec, {42.0, 25.0}));
  t.parent = {{"v0", "v6"}, {"v1", "v6"}, {"v2", "v7"}, {"v3", "v8"},
              {"v4", "v8"}, {"v5", "v10"}, {"v6", "v9"}, {"v7", "v9"},
              {"v8", "v9"}, {"v9", "v10"}};
  return t;
}

}  // namespace fixtures
