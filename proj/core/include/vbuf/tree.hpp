#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vbuf/netlist.hpp"

namespace vbuf {

// A buffer-embedded tree: the net's driver and sinks plus inserted buffers,
// connected by a child -> parent map rooted at the driver.
struct BufferedTree {
  std::string net_id;
  std::vector<Cell> nodes;                    // driver first
  std::map<std::string, std::string> parent;  // child id -> parent id
  bool infeasible = false;        // no option satisfied every constraint
  bool depth_truncated = false;   // inference hit its iteration cap

  const Cell& driver() const { return nodes.front(); }
  const Cell* find(const std::string& id) const;
  Cell* find(const std::string& id);
  std::vector<const Cell*> children_of(const std::string& id) const;
  int buffer_count() const;
  double buffer_area() const;

  static BufferedTree unbuffered(const Net& net);
};

// Level of a node: length of the longest path from it down to a sink,
// counted over buffers; sinks are level 0. The driver carries no level.
// Throws on a cyclic or unrooted parent map.
std::map<std::string, int> tree_levels(const BufferedTree& tree);

// Number of buffer levels (0 for an unbuffered tree).
int tree_depth(const BufferedTree& tree);

// One recursion step of the bottom-up decomposition: the active sequence
// and, for each non-driver element, its parent buffer at this level (or
// nothing, when the parent sits higher up or is the driver).
struct LevelPair {
  std::vector<std::string> input;  // driver first, then id order
  std::map<std::string, std::optional<std::string>> labels;
};

// Decomposes a tree into its level pairs. Pair i's input holds the driver
// plus every already-created node whose parent has not been assigned yet;
// the count of pairs is the buffer-level count plus one terminating
// all-None pair.
std::vector<LevelPair> tree_to_pairs(const BufferedTree& tree);

// Reconstructs a tree from its pair decomposition; inverse of
// tree_to_pairs up to node order.
BufferedTree replay_pairs(const BufferedTree& original,
                          const std::vector<LevelPair>& pairs);

bool trees_isomorphic(const BufferedTree& a, const BufferedTree& b);

}  // namespace vbuf
