#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "vbuf/design.hpp"

namespace vbuf {

namespace {

using nlohmann::json;

json header_block()
{
  return {{"units",
           {{"distance", "um"},
            {"capacitance", "fF"},
            {"time", "ps"},
            {"resistance", "ohm"}}}};
}

std::string slurp(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << text;
}

json net_to_json(const Net& net)
{
  json jn;
  jn["id"] = net.id;
  jn["driver"] = {{"id", net.driver.id},
                  {"x", net.driver.x},
                  {"y", net.driver.y},
                  {"out_res", net.driver.elec.output_res},
                  {"max_cap", net.driver.elec.max_cap},
                  {"max_fanout", net.driver.elec.max_fanout},
                  {"out_slew", net.driver.elec.output_slew}};
  jn["sinks"] = json::array();
  for (const Cell& s : net.sinks) {
    jn["sinks"].push_back(
        {{"id", s.id}, {"x", s.x}, {"y", s.y}, {"in_cap", s.elec.input_cap}});
  }
  return jn;
}

Net net_from_json(const json& jn)
{
  Net net;
  net.id = jn.at("id").get<std::string>();
  const json& jd = jn.at("driver");
  net.driver.id = jd.at("id").get<std::string>();
  net.driver.kind = CellKind::Driver;
  net.driver.x = jd.at("x").get<double>();
  net.driver.y = jd.at("y").get<double>();
  net.driver.elec.output_res = jd.at("out_res").get<double>();
  net.driver.elec.max_cap = jd.at("max_cap").get<double>();
  net.driver.elec.max_fanout = jd.at("max_fanout").get<int>();
  net.driver.elec.output_slew = jd.value("out_slew", -1.0);
  for (const json& js : jn.at("sinks")) {
    Cell s;
    s.id = js.at("id").get<std::string>();
    s.kind = CellKind::Sink;
    s.x = js.at("x").get<double>();
    s.y = js.at("y").get<double>();
    s.elec.input_cap = js.at("in_cap").get<double>();
    net.sinks.push_back(std::move(s));
  }
  return net;
}

}  // namespace

Net Design::materialize(int net_idx) const
{
  std::vector<Pt> positions(cells.size());
  for (size_t i = 0; i < cells.size(); ++i) {
    positions[i] = cells[i].loc();
  }
  return materialize(net_idx, positions);
}

Net Design::materialize(int net_idx, const std::vector<Pt>& positions) const
{
  const DesignNet& dn = nets.at(net_idx);
  Net net;
  net.id = dn.id;
  net.driver.id = cells[dn.driver].id;
  net.driver.kind = CellKind::Driver;
  net.driver.x = positions[dn.driver].x;
  net.driver.y = positions[dn.driver].y;
  net.driver.width = cells[dn.driver].width;
  net.driver.height = cells[dn.driver].height;
  net.driver.elec.output_res = dn.driver_out_res;
  net.driver.elec.max_cap = dn.driver_max_cap;
  net.driver.elec.max_fanout = dn.driver_max_fanout;
  net.driver.elec.output_slew = dn.driver_out_slew;
  for (size_t k = 0; k < dn.sinks.size(); ++k) {
    const int c = dn.sinks[k];
    Cell s;
    s.id = cells[c].id;
    s.kind = CellKind::Sink;
    s.x = positions[c].x;
    s.y = positions[c].y;
    s.width = cells[c].width;
    s.height = cells[c].height;
    s.elec.input_cap = dn.sink_caps[k];
    net.sinks.push_back(std::move(s));
  }
  return net;
}

double Design::movable_area() const
{
  double a = 0.0;
  for (const DesignCell& c : cells) {
    if (c.movable) {
      a += c.area();
    }
  }
  return a;
}

void save_design(const Design& design, const std::string& path)
{
  json j;
  j["header"] = header_block();
  j["region"] = {{"lx", design.region.lx},
                 {"ly", design.region.ly},
                 {"rx", design.region.rx},
                 {"ry", design.region.ry}};
  j["cells"] = json::array();
  for (const DesignCell& c : design.cells) {
    j["cells"].push_back({{"id", c.id},
                          {"x", c.x},
                          {"y", c.y},
                          {"w", c.width},
                          {"h", c.height},
                          {"movable", c.movable}});
  }
  j["nets"] = json::array();
  for (size_t i = 0; i < design.nets.size(); ++i) {
    j["nets"].push_back(net_to_json(design.materialize(static_cast<int>(i))));
  }
  spit(path, j.dump(1));
}

Design load_design(const std::string& path)
{
  const json j = json::parse(slurp(path));
  Design d;
  if (j.contains("region")) {
    const json& r = j.at("region");
    d.region = {r.at("lx").get<double>(), r.at("ly").get<double>(),
                r.at("rx").get<double>(), r.at("ry").get<double>()};
  }

  std::map<std::string, int> cell_index;
  if (j.contains("cells")) {
    for (const json& jc : j.at("cells")) {
      DesignCell c;
      c.id = jc.at("id").get<std::string>();
      c.x = jc.at("x").get<double>();
      c.y = jc.at("y").get<double>();
      c.width = jc.value("w", 0.0);
      c.height = jc.value("h", 0.0);
      c.movable = jc.value("movable", true);
      cell_index[c.id] = static_cast<int>(d.cells.size());
      d.cells.push_back(std::move(c));
    }
  }

  // Pins with no cell entry become implicit fixed zero-area terminals, so
  // bare netlist files stay loadable.
  auto bind = [&](const std::string& id, double x, double y) {
    auto it = cell_index.find(id);
    if (it != cell_index.end()) {
      return it->second;
    }
    DesignCell c;
    c.id = id;
    c.x = x;
    c.y = y;
    c.movable = false;
    cell_index[id] = static_cast<int>(d.cells.size());
    d.cells.push_back(std::move(c));
    d.region.expand({x, y});
    return cell_index[id];
  };

  for (const json& jn : j.at("nets")) {
    const Net net = net_from_json(jn);
    DesignNet dn;
    dn.id = net.id;
    dn.driver = bind(net.driver.id, net.driver.x, net.driver.y);
    dn.driver_out_res = net.driver.elec.output_res;
    dn.driver_max_cap = net.driver.elec.max_cap;
    dn.driver_max_fanout = net.driver.elec.max_fanout;
    dn.driver_out_slew = net.driver.elec.output_slew;
    for (const Cell& s : net.sinks) {
      dn.sinks.push_back(bind(s.id, s.x, s.y));
      dn.sink_caps.push_back(s.elec.input_cap);
    }
    d.nets.push_back(std::move(dn));
  }
  return d;
}

Technology load_tech(const std::string& path)
{
  const json j = json::parse(slurp(path));
  Technology t;
  for (const json& jb : j.at("buffers")) {
    BufferSpec b;
    b.name = jb.at("name").get<std::string>();
    b.area = jb.at("area").get<double>();
    b.input_cap = jb.at("input_cap").get<double>();
    b.output_res = jb.at("output_res").get<double>();
    b.max_output_cap = jb.at("max_output_cap").get<double>();
    b.width = jb.at("width").get<double>();
    b.height = jb.at("height").get<double>();
    b.max_fanout = jb.value("max_fanout", 20);
    t.lib.buffers.push_back(std::move(b));
  }
  const json& jt = j.at("tech");
  t.params.unit_wire_cap = jt.at("unit_wire_cap").get<double>();
  t.params.unit_wire_res = jt.at("unit_wire_res").get<double>();
  t.params.alpha = jt.at("alpha").get<double>();
  t.params.beta = jt.at("beta").get<double>();
  t.params.max_wirelength = jt.at("max_wirelength").get<double>();
  t.params.max_slew = jt.at("max_slew").get<double>();
  t.params.ohm_ff_to_ps = jt.value("ohm_ff_to_ps", 1e-3);
  return t;
}

void save_tech(const Technology& tech, const std::string& path)
{
  json j;
  j["header"] = header_block();
  j["buffers"] = json::array();
  for (const BufferSpec& b : tech.lib.buffers) {
    j["buffers"].push_back({{"name", b.name},
                            {"area", b.area},
                            {"input_cap", b.input_cap},
                            {"output_res", b.output_res},
                            {"max_output_cap", b.max_output_cap},
                            {"width", b.width},
                            {"height", b.height},
                            {"max_fanout", b.max_fanout}});
  }
  j["tech"] = {{"unit_wire_cap", tech.params.unit_wire_cap},
               {"unit_wire_res", tech.params.unit_wire_res},
               {"alpha", tech.params.alpha},
               {"beta", tech.params.beta},
               {"max_wirelength", tech.params.max_wirelength},
               {"max_slew", tech.params.max_slew},
               {"ohm_ff_to_ps", tech.params.ohm_ff_to_ps}};
  spit(path, j.dump(1));
}

void save_snapshots(const std::vector<NetSnapshot>& snaps, const Rect& region,
                    const std::string& path)
{
  json j;
  j["header"] = header_block();
  j["region"] = {{"lx", region.lx},
                 {"ly", region.ly},
                 {"rx", region.rx},
                 {"ry", region.ry}};
  j["triggers"] = json::array();
  for (const NetSnapshot& s : snaps) {
    json jt;
    jt["trigger_index"] = s.trigger_index;
    jt["threshold"] = s.threshold;
    jt["nets"] = json::array();
    for (const Net& n : s.nets) {
      jt["nets"].push_back(net_to_json(n));
    }
    j["triggers"].push_back(std::move(jt));
  }
  spit(path, j.dump());
}

std::vector<NetSnapshot> load_snapshots(const std::string& path, Rect* region)
{
  const json j = json::parse(slurp(path));
  if (region != nullptr && j.contains("region")) {
    const json& r = j.at("region");
    *region = {r.at("lx").get<double>(), r.at("ly").get<double>(),
               r.at("rx").get<double>(), r.at("ry").get<double>()};
  }
  std::vector<NetSnapshot> out;
  for (const json& jt : j.at("triggers")) {
    NetSnapshot s;
    s.trigger_index = jt.at("trigger_index").get<int>();
    s.threshold = jt.at("threshold").get<double>();
    for (const json& jn : jt.at("nets")) {
      s.nets.push_back(net_from_json(jn));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace vbuf
