#pragma once

#include <map>
#include <vector>

#include "vbuf/oracle.hpp"

namespace vbuf::oracle::detail {

// Candidate sites organized per topology edge. An edge is named by its
// child node index; sites are ordered from the child end toward the
// parent, so "first inserted site walking up" resolves parenthood.
struct SitePlan {
  struct Site {
    Pt at;
    int edge_child = -1;
    int order = 0;  // position along the edge, child side first
  };
  std::vector<Site> sites;                 // global id = index
  std::vector<std::vector<int>> by_edge;   // child node idx -> site ids
};

SitePlan plan_sites(const RouteTree& topo, double pitch,
                    bool include_edge_start);

// Materializes the buffered tree implied by a site -> buffer assignment:
// every pin or buffer hangs from the first inserted site on its upward
// walk, or from the driver.
BufferedTree build_tree_from_insertions(
    const Net& net,
    const RouteTree& topo,
    const SitePlan& plan,
    const std::map<int, int>& insertions,  // site id -> library index
    const BufferLibrary& lib,
    const TechParams& tech);

// Sum over driving stages of normalized cap/fanout/wirelength excess;
// zero exactly when the tree satisfies every constraint.
double tree_constraint_excess(const BufferedTree& tree,
                              const TechParams& tech);

}  // namespace vbuf::oracle::detail
