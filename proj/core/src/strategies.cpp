#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vbuf/electrics.hpp"
#include "vbuf/placer.hpp"

namespace vbuf::place {

Strategy strategy_from_string(const std::string& name)
{
  if (name == "none") return Strategy::None;
  if (name == "mlbuf" || name == "model") return Strategy::Model;
  if (name == "oracle") return Strategy::Oracle;
  if (name == "adhoc") return Strategy::AdHoc;
  throw std::invalid_argument("unknown strategy: " + name);
}

std::string strategy_name(Strategy s)
{
  switch (s) {
    case Strategy::None: return "none";
    case Strategy::Model: return "mlbuf";
    case Strategy::Oracle: return "oracle";
    case Strategy::AdHoc: return "adhoc";
  }
  return "?";
}

std::vector<int> problematic_nets(const Design& design,
                                  const std::vector<Pt>& positions,
                                  const TechParams& tech)
{
  std::vector<int> out;
  for (size_t i = 0; i < design.nets.size(); ++i) {
    const Net net = design.materialize(static_cast<int>(i), positions);
    if (net.sinks.empty()) {
      continue;
    }
    std::vector<Pt> pts{net.driver.loc()};
    for (const Cell& s : net.sinks) {
      pts.push_back(s.loc());
    }
    const bool is_long = hpwl(pts) > tech.max_wirelength;
    if (is_long || check_erc(net, tech).total() > 0) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

std::vector<VirtualBufferBox> boxes_from_tree(const BufferedTree& tree)
{
  std::vector<VirtualBufferBox> boxes;
  for (const Cell& c : tree.nodes) {
    if (c.kind != CellKind::Buffer) {
      continue;
    }
    VirtualBufferBox b;
    b.bounds = {c.x - c.width / 2, c.y - c.height / 2, c.x + c.width / 2,
                c.y + c.height / 2};
    b.source_net = tree.net_id;
    boxes.push_back(std::move(b));
  }
  return boxes;
}

std::vector<VirtualBufferBox> adhoc_virtual_buffers(const Net& net,
                                                    const BufferLibrary& lib,
                                                    const TechParams& tech)
{
  std::vector<Pt> pts{net.driver.loc()};
  for (const Cell& s : net.sinks) {
    pts.push_back(s.loc());
  }
  Rect bbox = Rect::around(pts[0]);
  for (const Pt& p : pts) {
    bbox.expand(p);
  }

  // Margined wirelength, then load-derived count with a routing overhead
  // factor; at least one box whenever the net triggered at all.
  const double w_est = hpwl(pts) * 1.25;
  double load = tech.alpha * w_est * tech.unit_wire_cap;
  for (const Cell& s : net.sinks) {
    load += s.elec.input_cap;
  }
  const BufferSpec& small = lib.smallest();
  int count = load <= small.max_output_cap
                  ? 0
                  : static_cast<int>(std::ceil(load / small.max_output_cap));
  count = static_cast<int>(std::ceil(count * 1.2));
  count = std::max(count, 1);

  // Two thirds of the boxes go to the half of the bounding box farther
  // from the driver, split along the longer axis.
  const bool split_x = bbox.width() >= bbox.height();
  const double mid = split_x ? 0.5 * (bbox.lx + bbox.rx)
                             : 0.5 * (bbox.ly + bbox.ry);
  const double driver_axis = split_x ? net.driver.x : net.driver.y;
  const bool distal_is_high = driver_axis <= mid;

  const int distal = (2 * count + 2) / 3;  // ceil(2n/3)
  const int proximal = count - distal;

  auto emit = [&](int n, bool high_half,
                  std::vector<VirtualBufferBox>& out) {
    for (int i = 0; i < n; ++i) {
      const double f = static_cast<double>(i + 1) / (n + 1);
      double cx, cy;
      if (split_x) {
        const double lo = high_half ? mid : bbox.lx;
        const double hi = high_half ? bbox.rx : mid;
        cx = lo + f * (hi - lo);
        cy = 0.5 * (bbox.ly + bbox.ry);
      } else {
        const double lo = high_half ? mid : bbox.ly;
        const double hi = high_half ? bbox.ry : mid;
        cy = lo + f * (hi - lo);
        cx = 0.5 * (bbox.lx + bbox.rx);
      }
      VirtualBufferBox b;
      b.bounds = {cx - small.width / 2, cy - small.height / 2,
                  cx + small.width / 2, cy + small.height / 2};
      b.source_net = net.id;
      out.push_back(std::move(b));
    }
  };

  std::vector<VirtualBufferBox> boxes;
  emit(distal, distal_is_high, boxes);
  emit(proximal, !distal_is_high, boxes);
  // Clamp inside the net bounding box.
  for (VirtualBufferBox& b : boxes) {
    const double w = b.bounds.rx - b.bounds.lx;
    const double h = b.bounds.ry - b.bounds.ly;
    b.bounds.lx = std::clamp(b.bounds.lx, bbox.lx, std::max(bbox.lx, bbox.rx - w));
    b.bounds.ly = std::clamp(b.bounds.ly, bbox.ly, std::max(bbox.ly, bbox.ry - h));
    b.bounds.rx = b.bounds.lx + w;
    b.bounds.ry = b.bounds.ly + h;
  }
  return boxes;
}

double total_hpwl(const Design& design, const std::vector<Pt>& positions)
{
  double sum = 0.0;
  for (const DesignNet& net : design.nets) {
    if (net.driver < 0) {
      continue;
    }
    Rect bb = Rect::around(positions[net.driver]);
    for (int s : net.sinks) {
      bb.expand(positions[s]);
    }
    sum += bb.hpwl();
  }
  return sum;
}

}  // namespace vbuf::place
