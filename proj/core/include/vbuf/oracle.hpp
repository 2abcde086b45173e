#pragma once

#include <string>
#include <vector>

#include "vbuf/netlist.hpp"
#include "vbuf/tree.hpp"

namespace vbuf::oracle {

// Rectilinear routing topology over a net's pins. Node 0 is the driver;
// each other node attaches to an earlier node, and the connecting edge is
// embedded as an L (horizontal from the attach point, then vertical).
struct RouteTree {
  struct Node {
    Pt at;
    int pin = -1;     // index into {driver, sinks...}; -1 for bend points
    int parent = -1;  // upstream node index, -1 for the root
  };
  std::vector<Node> nodes;

  double total_length() const;
};

// Prim-grown rectilinear MST with L-shaped edge embedding. Deterministic:
// distance ties break on sink id, then attach-node index.
RouteTree build_topology(const Net& net);

struct DpConfig {
  double site_pitch = 10.0;       // um between candidate sites along edges
  bool site_at_edge_start = true; // add the zero-offset site on every edge
  int max_options = 64;           // per-node beam after dominance pruning
  bool dominance_pruning = true;  // disable only to cross-check optimality
};

// Bottom-up minimum-area buffering over the routing tree. Candidate sites
// lie every site_pitch um along edges; each may host any library buffer.
// Options violating the would-be driving stage's C_max / O_max / W_max are
// pruned. When no root option is feasible the least-excess one is
// returned and the tree is flagged infeasible.
BufferedTree dp_buffer(const Net& net,
                       const RouteTree& topo,
                       const BufferLibrary& lib,
                       const TechParams& tech,
                       const DpConfig& cfg = {});

BufferedTree dp_buffer(const Net& net,
                       const BufferLibrary& lib,
                       const TechParams& tech,
                       const DpConfig& cfg = {});

// Exhaustive reference: tries every buffer-type assignment over every
// candidate site. Exponential; only usable on small instances. Kept next
// to the DP so tests can compare the two routes independently.
BufferedTree brute_force_buffer(const Net& net,
                                const RouteTree& topo,
                                const BufferLibrary& lib,
                                const TechParams& tech,
                                const DpConfig& cfg = {});

// Candidate sites for a topology, in deterministic order.
std::vector<Pt> candidate_sites(const RouteTree& topo, double pitch,
                                bool include_edge_start = true);

}  // namespace vbuf::oracle
