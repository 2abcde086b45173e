#include "vbuf/electrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "json.hpp"

namespace vbuf {

namespace {

double relu(double x)
{
  return x > 0.0 ? x : 0.0;
}

std::vector<Pt> stage_points(const Cell& head,
                             const std::vector<const Cell*>& children)
{
  std::vector<Pt> pts;
  pts.reserve(children.size() + 1);
  pts.push_back(head.loc());
  for (const Cell* c : children) {
    pts.push_back(c->loc());
  }
  return pts;
}

}  // namespace

double estimate_output_cap(const Cell& head,
                           const std::vector<const Cell*>& children,
                           const TechParams& tech)
{
  const double w = hpwl(stage_points(head, children));
  double cap = tech.alpha * w * tech.unit_wire_cap;
  for (const Cell* c : children) {
    cap += c->elec.input_cap;
  }
  return cap;
}

double estimate_output_slew(const Cell& head,
                            double c_out,
                            double stage_hpwl,
                            const TechParams& tech)
{
  const double r_wire = tech.alpha * stage_hpwl * tech.unit_wire_res;
  return (head.elec.output_res + r_wire) * c_out * tech.beta
         * tech.ohm_ff_to_ps;
}

void ErcReport::add(ErcViolation v)
{
  switch (v.kind) {
    case ErcKind::Slew: ++slew_violations; break;
    case ErcKind::Cap: ++cap_violations; break;
    case ErcKind::Fanout: ++fanout_violations; break;
    case ErcKind::Wirelength: ++wirelength_violations; break;
  }
  details.push_back(std::move(v));
}

void ErcReport::merge(const ErcReport& other)
{
  slew_violations += other.slew_violations;
  cap_violations += other.cap_violations;
  fanout_violations += other.fanout_violations;
  wirelength_violations += other.wirelength_violations;
  details.insert(details.end(), other.details.begin(), other.details.end());
}

std::string ErcReport::to_json() const
{
  nlohmann::json j;
  j["slew_violations"] = slew_violations;
  j["cap_violations"] = cap_violations;
  j["fanout_violations"] = fanout_violations;
  j["wirelength_violations"] = wirelength_violations;
  j["details"] = nlohmann::json::array();
  static const char* names[] = {"slew", "cap", "fanout", "wirelength"};
  for (const ErcViolation& v : details) {
    j["details"].push_back({{"net", v.net_id},
                            {"pin", v.pin_id},
                            {"kind", names[static_cast<int>(v.kind)]},
                            {"value", v.value},
                            {"limit", v.limit}});
  }
  return j.dump();
}

namespace {

// Evaluates one driving stage against all four limits.
void check_stage(const std::string& net_id,
                 const Cell& head,
                 const std::vector<const Cell*>& children,
                 const TechParams& tech,
                 ErcReport& report)
{
  if (children.empty()) {
    return;
  }
  const double w = hpwl(stage_points(head, children));
  const double c_out = estimate_output_cap(head, children, tech);
  const double s_out = estimate_output_slew(head, c_out, w, tech);
  const int fanout = static_cast<int>(children.size());

  if (head.elec.max_cap > 0 && c_out > head.elec.max_cap) {
    report.add({net_id, head.id, ErcKind::Cap, c_out, head.elec.max_cap});
  }
  if (head.elec.max_fanout > 0 && fanout > head.elec.max_fanout) {
    report.add({net_id, head.id, ErcKind::Fanout,
                static_cast<double>(fanout),
                static_cast<double>(head.elec.max_fanout)});
  }
  if (s_out > tech.max_slew) {
    report.add({net_id, head.id, ErcKind::Slew, s_out, tech.max_slew});
  }
  if (tech.alpha * w > tech.max_wirelength) {
    report.add({net_id, head.id, ErcKind::Wirelength, tech.alpha * w,
                tech.max_wirelength});
  }
}

}  // namespace

ErcReport check_erc(const Net& net, const TechParams& tech)
{
  ErcReport report;
  std::vector<const Cell*> children;
  children.reserve(net.sinks.size());
  for (const Cell& s : net.sinks) {
    children.push_back(&s);
  }
  check_stage(net.id, net.driver, children, tech, report);
  return report;
}

ErcReport check_erc(const BufferedTree& tree, const TechParams& tech)
{
  ErcReport report;
  for (const Cell& c : tree.nodes) {
    if (c.kind == CellKind::Sink) {
      continue;
    }
    check_stage(tree.net_id, c, tree.children_of(c.id), tech, report);
  }
  return report;
}

ErcPenalty penalty_erc(const BufferedTree& tree, const TechParams& tech)
{
  ErcPenalty p;
  for (const Cell& c : tree.nodes) {
    if (c.kind == CellKind::Sink) {
      continue;
    }
    const auto children = tree.children_of(c.id);
    if (children.empty()) {
      continue;
    }
    const double c_out = estimate_output_cap(c, children, tech);
    if (c.elec.max_cap > 0) {
      p.cap += relu(c_out - c.elec.max_cap);
    }
    if (c.elec.max_fanout > 0) {
      p.fanout +=
          relu(static_cast<double>(children.size()) - c.elec.max_fanout);
    }
  }
  return p;
}

double penalty_wire(const BufferedTree& tree, const TechParams& tech)
{
  double p = 0.0;
  for (const Cell& c : tree.nodes) {
    if (c.kind == CellKind::Sink) {
      continue;
    }
    const auto children = tree.children_of(c.id);
    if (children.empty()) {
      continue;
    }
    const double w = hpwl(stage_points(c, children));
    p += relu(tech.alpha * w - tech.max_wirelength);
  }
  return p;
}

double penalty_area(double total_area, double smallest_buffer_area,
                    double w_area)
{
  if (total_area <= 0.0) {
    return 0.0;
  }
  return w_area * relu(std::log(total_area) - std::log(smallest_buffer_area));
}

void annotate_tree_electrics(BufferedTree& tree, const TechParams& tech)
{
  // Top-down: each driving stage sets its own output cap/slew and every
  // child's input slew.
  std::function<void(Cell&)> visit = [&](Cell& head) {
    auto child_ptrs = tree.children_of(head.id);
    if (child_ptrs.empty()) {
      return;
    }
    std::vector<Pt> pts{head.loc()};
    for (const Cell* c : child_ptrs) {
      pts.push_back(c->loc());
    }
    const double w = hpwl(pts);
    const double c_out = estimate_output_cap(head, child_ptrs, tech);
    const double s_out = estimate_output_slew(head, c_out, w, tech);
    head.elec.output_cap = c_out;
    head.elec.output_slew = s_out;
    for (const Cell* c : child_ptrs) {
      Cell* child = tree.find(c->id);
      child->elec.input_slew = s_out;
      if (child->kind == CellKind::Buffer) {
        visit(*child);
      }
    }
  };
  visit(*tree.find(tree.driver().id));
}


PenaltyGradients penalty_gradients(const BufferedTree& tree,
                                   const TechParams& tech)
{
  PenaltyGradients g;
  for (const Cell& c : tree.nodes) {
    g.d_cap[c.id] = {0.0, 0.0};
    g.d_wire[c.id] = {0.0, 0.0};
  }

  for (const Cell& head : tree.nodes) {
    if (head.kind == CellKind::Sink) {
      continue;
    }
    const auto children = tree.children_of(head.id);
    if (children.empty()) {
      continue;
    }
    // Stage nodes in order: head first, then children; argmax/argmin with
    // first-index tie-breaking fixes the subgradient at ties.
    std::vector<const Cell*> stage;
    stage.push_back(&head);
    stage.insert(stage.end(), children.begin(), children.end());

    int ix_max = 0, ix_min = 0, iy_max = 0, iy_min = 0;
    for (int i = 1; i < static_cast<int>(stage.size()); ++i) {
      if (stage[i]->x > stage[ix_max]->x) ix_max = i;
      if (stage[i]->x < stage[ix_min]->x) ix_min = i;
      if (stage[i]->y > stage[iy_max]->y) iy_max = i;
      if (stage[i]->y < stage[iy_min]->y) iy_min = i;
    }
    const double w = (stage[ix_max]->x - stage[ix_min]->x)
                     + (stage[iy_max]->y - stage[iy_min]->y);
    const double c_out = estimate_output_cap(head, children, tech);

    // dW/dx of the extreme nodes is +-1; zero at exact kinks.
    const double cap_excess = head.elec.max_cap > 0
                                  ? c_out - head.elec.max_cap
                                  : -1.0;
    const double wire_excess = tech.alpha * w - tech.max_wirelength;
    const double cap_coeff =
        cap_excess > 0 ? tech.alpha * tech.unit_wire_cap : 0.0;
    const double wire_coeff = wire_excess > 0 ? tech.alpha : 0.0;

    auto bump = [&](std::map<std::string, Pt>& m, int idx, double dx,
                    double dy) {
      Pt& p = m[stage[idx]->id];
      p.x += dx;
      p.y += dy;
    };
    if (cap_coeff != 0.0) {
      bump(g.d_cap, ix_max, cap_coeff, 0.0);
      bump(g.d_cap, ix_min, -cap_coeff, 0.0);
      bump(g.d_cap, iy_max, 0.0, cap_coeff);
      bump(g.d_cap, iy_min, 0.0, -cap_coeff);
    }
    if (wire_coeff != 0.0) {
      bump(g.d_wire, ix_max, wire_coeff, 0.0);
      bump(g.d_wire, ix_min, -wire_coeff, 0.0);
      bump(g.d_wire, iy_max, 0.0, wire_coeff);
      bump(g.d_wire, iy_min, 0.0, -wire_coeff);
    }
  }
  return g;
}

}  // namespace vbuf
