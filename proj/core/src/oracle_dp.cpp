#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "oracle_internal.hpp"
#include "vbuf/electrics.hpp"

namespace vbuf::oracle {

namespace detail {

BufferedTree build_tree_from_insertions(const Net& net,
                                        const RouteTree& topo,
                                        const SitePlan& plan,
                                        const std::map<int, int>& insertions,
                                        const BufferLibrary& lib,
                                        const TechParams& tech)
{
  BufferedTree tree;
  tree.net_id = net.id;
  tree.nodes.push_back(net.driver);
  for (const Cell& s : net.sinks) {
    tree.nodes.push_back(s);
  }
  // Buffer naming follows global site id so reconstruction is canonical.
  std::map<int, std::string> site_buffer;
  int counter = 0;
  for (const auto& [site_id, lib_idx] : insertions) {
    const std::string name = net.id + "_b" + std::to_string(counter++);
    site_buffer[site_id] = name;
    tree.nodes.push_back(make_buffer_cell(name, lib.buffers[lib_idx],
                                          plan.sites[site_id].at));
  }

  // Parent of an element sitting at (edge, order): the first inserted site
  // strictly above it on its own edge, else recurse from the edge's
  // parent node upward; the driver catches everything else.
  auto resolve_up = [&](int edge_child, int above_order) -> std::string {
    int node = edge_child;
    int from_order = above_order;
    while (node >= 0) {
      const RouteTree::Node& n = topo.nodes[node];
      if (n.parent < 0) {
        break;  // reached the driver node: no edge above
      }
      for (int sid : plan.by_edge[node]) {
        if (plan.sites[sid].order >= from_order && site_buffer.count(sid)) {
          return site_buffer.at(sid);
        }
      }
      node = n.parent;
      from_order = 0;
    }
    return net.driver.id;
  };

  // Pins hang from the first site on the edge they terminate (order 0 up).
  for (size_t i = 0; i < topo.nodes.size(); ++i) {
    const RouteTree::Node& n = topo.nodes[i];
    if (n.pin <= 0) {
      continue;  // driver or bend
    }
    const Cell& sink = net.sinks[n.pin - 1];
    tree.parent[sink.id] = resolve_up(static_cast<int>(i), 0);
  }
  for (const auto& [site_id, name] : site_buffer) {
    const SitePlan::Site& s = plan.sites[site_id];
    tree.parent[name] = resolve_up(s.edge_child, s.order + 1);
  }
  annotate_tree_electrics(tree, tech);
  return tree;
}

double tree_constraint_excess(const BufferedTree& tree,
                              const TechParams& tech)
{
  double excess = 0.0;
  for (const Cell& c : tree.nodes) {
    if (c.kind == CellKind::Sink) {
      continue;
    }
    const auto children = tree.children_of(c.id);
    if (children.empty()) {
      continue;
    }
    std::vector<Pt> pts{c.loc()};
    for (const Cell* ch : children) {
      pts.push_back(ch->loc());
    }
    const double w = hpwl(pts);
    const double c_out = estimate_output_cap(c, children, tech);
    if (c.elec.max_cap > 0) {
      excess += std::max(0.0, (c_out - c.elec.max_cap) / c.elec.max_cap);
    }
    if (c.elec.max_fanout > 0) {
      excess += std::max(
          0.0, (static_cast<double>(children.size()) - c.elec.max_fanout)
                   / c.elec.max_fanout);
    }
    excess += std::max(
        0.0, (tech.alpha * w - tech.max_wirelength) / tech.max_wirelength);
  }
  return excess;
}

}  // namespace detail

namespace {

using detail::SitePlan;

struct DpOption {
  double sum_cin = 0.0;
  int fanout = 0;
  double area = 0.0;
  Rect bbox;
  std::vector<std::pair<int, int>> trace;  // (site id, lib idx), sorted

  bool dominates(const DpOption& o) const
  {
    return sum_cin <= o.sum_cin && fanout <= o.fanout && area <= o.area
           && o.bbox.contains(bbox);
  }
};

bool option_order(const DpOption& a, const DpOption& b)
{
  if (a.area != b.area) return a.area < b.area;
  if (a.sum_cin != b.sum_cin) return a.sum_cin < b.sum_cin;
  if (a.fanout != b.fanout) return a.fanout < b.fanout;
  return a.trace < b.trace;
}

void prune(std::vector<DpOption>& opts, const DpConfig& cfg)
{
  std::sort(opts.begin(), opts.end(), option_order);
  if (cfg.dominance_pruning) {
    std::vector<DpOption> kept;
    for (DpOption& o : opts) {
      bool dominated = false;
      for (const DpOption& k : kept) {
        if (k.dominates(o)) {
          dominated = true;
          break;
        }
      }
      if (!dominated) {
        kept.push_back(std::move(o));
      }
    }
    opts = std::move(kept);
  }
  // Truncation keeps an even spread along the frontier (options are
  // sorted area-first): collapsing onto the low-area end starves the
  // low-cap, low-fanout options feasibility needs higher up the tree.
  const int n = static_cast<int>(opts.size());
  if (n > cfg.max_options) {
    std::vector<DpOption> kept;
    kept.reserve(cfg.max_options);
    int prev = -1;
    for (int i = 0; i < cfg.max_options; ++i) {
      const int pick = static_cast<int>(
          static_cast<int64_t>(i) * (n - 1) / (cfg.max_options - 1));
      if (pick != prev) {
        kept.push_back(std::move(opts[pick]));
        prev = pick;
      }
    }
    opts = std::move(kept);
  }
}

// Stage feasibility for a head at `at` driving an option's exposed set.
struct StageEval {
  double w = 0.0;
  double c_out = 0.0;
};
StageEval eval_stage(const Pt& at, const DpOption& o, const TechParams& tech)
{
  StageEval e;
  e.w = o.bbox.hpwl_with(at);
  e.c_out = tech.alpha * e.w * tech.unit_wire_cap + o.sum_cin;
  return e;
}

bool stage_ok(const StageEval& e, double max_cap, int max_fanout, int fanout,
              const TechParams& tech)
{
  return e.c_out <= max_cap && fanout <= max_fanout
         && tech.alpha * e.w <= tech.max_wirelength;
}

}  // namespace

BufferedTree dp_buffer(const Net& net,
                       const RouteTree& topo,
                       const BufferLibrary& lib,
                       const TechParams& tech,
                       const DpConfig& cfg)
{
  const SitePlan plan =
      detail::plan_sites(topo, cfg.site_pitch, cfg.site_at_edge_start);

  // children adjacency over topology nodes
  std::vector<std::vector<int>> kids(topo.nodes.size());
  for (size_t i = 0; i < topo.nodes.size(); ++i) {
    if (topo.nodes[i].parent >= 0) {
      kids[topo.nodes[i].parent].push_back(static_cast<int>(i));
    }
  }

  // Bottom-up: options for the subtree under each node, transformed along
  // the node's upward edge (sites may insert buffers), merged at parents.
  std::function<std::vector<DpOption>(int)> solve =
      [&](int node) -> std::vector<DpOption> {
    std::vector<DpOption> opts;
    bool first = true;
    for (int child : kids[node]) {
      std::vector<DpOption> sub = solve(child);
      if (first) {
        opts = std::move(sub);
        first = false;
      } else {
        std::vector<DpOption> merged;
        merged.reserve(opts.size() * sub.size());
        for (const DpOption& a : opts) {
          for (const DpOption& b : sub) {
            DpOption m = a;
            m.sum_cin += b.sum_cin;
            m.fanout += b.fanout;
            m.area += b.area;
            m.bbox.lx = std::min(m.bbox.lx, b.bbox.lx);
            m.bbox.ly = std::min(m.bbox.ly, b.bbox.ly);
            m.bbox.rx = std::max(m.bbox.rx, b.bbox.rx);
            m.bbox.ry = std::max(m.bbox.ry, b.bbox.ry);
            m.trace.insert(m.trace.end(), b.trace.begin(), b.trace.end());
            std::sort(m.trace.begin(), m.trace.end());
            merged.push_back(std::move(m));
          }
        }
        opts = std::move(merged);
        prune(opts, cfg);
      }
    }

    const int pin = topo.nodes[node].pin;
    if (pin > 0) {
      // The sink pin taps the wire here; it joins the exposed set of
      // every option.
      const Cell& sink = net.sinks[pin - 1];
      if (opts.empty()) {
        DpOption base;
        base.sum_cin = sink.elec.input_cap;
        base.fanout = 1;
        base.bbox = Rect::around(sink.loc());
        opts.push_back(std::move(base));
      } else {
        for (DpOption& o : opts) {
          o.sum_cin += sink.elec.input_cap;
          o.fanout += 1;
          o.bbox.expand(sink.loc());
        }
      }
    }
    if (opts.empty()) {
      // Bend with no subtree cannot happen; guard anyway.
      return opts;
    }

    if (node != 0) {
      // Walk the upward edge, child side first.
      for (int sid : plan.by_edge[node]) {
        std::vector<DpOption> inserted;
        for (const DpOption& o : opts) {
          for (int t = 0; t < lib.size(); ++t) {
            const BufferSpec& spec = lib.buffers[t];
            const StageEval e = eval_stage(plan.sites[sid].at, o, tech);
            if (!stage_ok(e, spec.max_output_cap, spec.max_fanout, o.fanout,
                          tech)) {
              continue;
            }
            DpOption n;
            n.sum_cin = spec.input_cap;
            n.fanout = 1;
            n.area = o.area + spec.area;
            n.bbox = Rect::around(plan.sites[sid].at);
            n.trace = o.trace;
            n.trace.emplace_back(sid, t);
            std::sort(n.trace.begin(), n.trace.end());
            inserted.push_back(std::move(n));
          }
        }
        opts.insert(opts.end(), inserted.begin(), inserted.end());
        prune(opts, cfg);
      }
    }
    return opts;
  };

  std::vector<DpOption> root_opts = solve(0);
  if (root_opts.empty()) {
    throw std::runtime_error("dp_buffer: no options for net " + net.id);
  }

  const Cell& drv = net.driver;
  const DpOption* best_feasible = nullptr;
  const DpOption* best_excess = nullptr;
  double least_excess = 0.0;
  for (const DpOption& o : root_opts) {
    const StageEval e = eval_stage(drv.loc(), o, tech);
    if (stage_ok(e, drv.elec.max_cap, drv.elec.max_fanout, o.fanout, tech)) {
      if (best_feasible == nullptr || option_order(o, *best_feasible)) {
        best_feasible = &o;
      }
    } else {
      double ex = 0.0;
      ex += std::max(0.0, (e.c_out - drv.elec.max_cap) / drv.elec.max_cap);
      ex += std::max(0.0, (static_cast<double>(o.fanout)
                           - drv.elec.max_fanout)
                              / drv.elec.max_fanout);
      ex += std::max(0.0, (tech.alpha * e.w - tech.max_wirelength)
                              / tech.max_wirelength);
      if (best_excess == nullptr || ex < least_excess
          || (ex == least_excess && option_order(o, *best_excess))) {
        best_excess = &o;
        least_excess = ex;
      }
    }
  }

  const DpOption* winner = best_feasible ? best_feasible : best_excess;
  std::map<int, int> insertions(winner->trace.begin(), winner->trace.end());
  BufferedTree tree = detail::build_tree_from_insertions(net, topo, plan,
                                                         insertions, lib,
                                                         tech);
  tree.infeasible = best_feasible == nullptr;
  return tree;
}

BufferedTree dp_buffer(const Net& net,
                       const BufferLibrary& lib,
                       const TechParams& tech,
                       const DpConfig& cfg)
{
  return dp_buffer(net, build_topology(net), lib, tech, cfg);
}

BufferedTree brute_force_buffer(const Net& net,
                                const RouteTree& topo,
                                const BufferLibrary& lib,
                                const TechParams& tech,
                                const DpConfig& cfg)
{
  const SitePlan plan =
      detail::plan_sites(topo, cfg.site_pitch, cfg.site_at_edge_start);
  const int n_sites = static_cast<int>(plan.sites.size());
  const int choices = lib.size() + 1;

  double total = 1;
  for (int s = 0; s < n_sites; ++s) {
    total *= choices;
    if (total > 4e6) {
      throw std::invalid_argument("brute_force_buffer: instance too large");
    }
  }

  BufferedTree best;
  bool have_feasible = false;
  double best_area = 0.0;
  double best_excess = 0.0;
  bool have_any = false;

  for (int64_t code = 0; code < static_cast<int64_t>(total); ++code) {
    std::map<int, int> insertions;
    int64_t c = code;
    for (int s = 0; s < n_sites; ++s) {
      const int pick = static_cast<int>(c % choices);
      c /= choices;
      if (pick > 0) {
        insertions[s] = pick - 1;
      }
    }
    BufferedTree tree = detail::build_tree_from_insertions(net, topo, plan,
                                                           insertions, lib,
                                                           tech);
    const double excess = detail::tree_constraint_excess(tree, tech);
    const double area = tree.buffer_area();
    if (excess == 0.0) {
      if (!have_feasible || area < best_area) {
        best = tree;
        best_area = area;
        have_feasible = true;
      }
    } else if (!have_feasible) {
      if (!have_any || excess < best_excess
          || (excess == best_excess && area < best_area)) {
        best = tree;
        best_excess = excess;
        best_area = area;
        have_any = true;
      }
    }
  }
  best.infeasible = !have_feasible;
  return best;
}

}  // namespace vbuf::oracle
