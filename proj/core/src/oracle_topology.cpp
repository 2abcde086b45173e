#include <algorithm>
#include <limits>

#include "oracle_internal.hpp"
#include "vbuf/oracle.hpp"

namespace vbuf::oracle {

double RouteTree::total_length() const
{
  double len = 0.0;
  for (const Node& n : nodes) {
    if (n.parent >= 0) {
      len += manhattan(n.at, nodes[n.parent].at);
    }
  }
  return len;
}

RouteTree build_topology(const Net& net)
{
  // Prim over pins with Manhattan distance, with attachment degree capped
  // so no branch point fans out beyond what edge buffering can shield.
  // Ties break on sink id, then on the attach pin's position in the
  // tree, so permuting the sink list cannot change the edge set when
  // distances are distinct.
  constexpr int kMaxAttach = 6;
  struct PinRef {
    const Cell* cell;
    int tree_node = -1;  // filled in once attached
    int attachments = 0;
  };
  std::vector<PinRef> pins;
  pins.push_back({&net.driver});
  for (const Cell& s : net.sinks) {
    pins.push_back({&s});
  }
  std::vector<int> order(net.sinks.size());
  for (size_t i = 0; i < order.size(); ++i) {
    order[i] = static_cast<int>(i) + 1;
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return pins[a].cell->id < pins[b].cell->id;
  });

  RouteTree tree;
  tree.nodes.push_back({net.driver.loc(), 0, -1});
  pins[0].tree_node = 0;

  std::vector<int> unattached = order;
  while (!unattached.empty()) {
    int best_pin = -1;
    int best_anchor = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int p : unattached) {
      for (size_t a = 0; a < pins.size(); ++a) {
        if (pins[a].tree_node < 0 || pins[a].attachments >= kMaxAttach) {
          continue;
        }
        const double d = manhattan(pins[p].cell->loc(), pins[a].cell->loc());
        if (d < best_dist) {
          best_dist = d;
          best_pin = p;
          best_anchor = static_cast<int>(a);
        }
      }
    }
    pins[best_anchor].attachments += 1;

    const Pt from = pins[best_anchor].cell->loc();
    const Pt to = pins[best_pin].cell->loc();
    int parent = pins[best_anchor].tree_node;
    // L embedding: horizontal leg first, then vertical.
    if (from.x != to.x && from.y != to.y) {
      tree.nodes.push_back({{to.x, from.y}, -1, parent});
      parent = static_cast<int>(tree.nodes.size()) - 1;
    }
    tree.nodes.push_back({to, best_pin, parent});
    pins[best_pin].tree_node = static_cast<int>(tree.nodes.size()) - 1;
    unattached.erase(
        std::find(unattached.begin(), unattached.end(), best_pin));
  }
  return tree;
}

std::vector<Pt> candidate_sites(const RouteTree& topo, double pitch,
                                bool include_edge_start)
{
  const auto plan = detail::plan_sites(topo, pitch, include_edge_start);
  std::vector<Pt> out;
  out.reserve(plan.sites.size());
  for (const auto& s : plan.sites) {
    out.push_back(s.at);
  }
  return out;
}

namespace detail {

SitePlan plan_sites(const RouteTree& topo, double pitch,
                    bool include_edge_start)
{
  SitePlan plan;
  plan.by_edge.resize(topo.nodes.size());
  for (size_t ci = 0; ci < topo.nodes.size(); ++ci) {
    const RouteTree::Node& n = topo.nodes[ci];
    if (n.parent < 0) {
      continue;
    }
    const Pt lo = n.at;                     // child end
    const Pt hi = topo.nodes[n.parent].at;  // parent end
    const double len = manhattan(lo, hi);
    int order = 0;
    // Offsets run from the child end. The zero-offset site lets any
    // subtree be shielded right at its root, which edge interiors alone
    // cannot guarantee on short edges.
    for (double d = include_edge_start ? 0.0 : pitch; d < len - 1e-9;
         d += pitch) {
      double rem = d;
      Pt p = lo;
      const double dx = std::abs(hi.x - lo.x);
      if (rem <= dx) {
        p.x += (hi.x > lo.x ? rem : -rem);
      } else {
        p.x = hi.x;
        const double ry = rem - dx;
        p.y += (hi.y > lo.y ? ry : -ry);
      }
      plan.sites.push_back({p, static_cast<int>(ci), order++});
      plan.by_edge[ci].push_back(static_cast<int>(plan.sites.size()) - 1);
    }
  }
  return plan;
}

}  // namespace detail

}  // namespace vbuf::oracle
