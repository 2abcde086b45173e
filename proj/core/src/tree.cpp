#include "vbuf/tree.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace vbuf {

const Cell* BufferedTree::find(const std::string& id) const
{
  for (const Cell& c : nodes) {
    if (c.id == id) {
      return &c;
    }
  }
  return nullptr;
}

Cell* BufferedTree::find(const std::string& id)
{
  for (Cell& c : nodes) {
    if (c.id == id) {
      return &c;
    }
  }
  return nullptr;
}

std::vector<const Cell*> BufferedTree::children_of(const std::string& id) const
{
  std::vector<const Cell*> out;
  for (const Cell& c : nodes) {
    auto it = parent.find(c.id);
    if (it != parent.end() && it->second == id) {
      out.push_back(&c);
    }
  }
  return out;
}

int BufferedTree::buffer_count() const
{
  int n = 0;
  for (const Cell& c : nodes) {
    n += c.kind == CellKind::Buffer ? 1 : 0;
  }
  return n;
}

double BufferedTree::buffer_area() const
{
  double a = 0.0;
  for (const Cell& c : nodes) {
    if (c.kind == CellKind::Buffer) {
      a += c.width * c.height;
    }
  }
  return a;
}

BufferedTree BufferedTree::unbuffered(const Net& net)
{
  BufferedTree t;
  t.net_id = net.id;
  t.nodes.push_back(net.driver);
  for (const Cell& s : net.sinks) {
    t.nodes.push_back(s);
    t.parent[s.id] = net.driver.id;
  }
  return t;
}

std::map<std::string, int> tree_levels(const BufferedTree& tree)
{
  const std::string& root = tree.driver().id;
  const size_t n = tree.nodes.size();

  // Every non-root node must reach the root through the parent map.
  for (const Cell& c : tree.nodes) {
    if (c.id == root) {
      continue;
    }
    std::string cur = c.id;
    size_t steps = 0;
    while (cur != root) {
      auto it = tree.parent.find(cur);
      if (it == tree.parent.end()) {
        throw std::runtime_error("tree_levels: unrooted node " + cur);
      }
      cur = it->second;
      if (++steps > n) {
        throw std::runtime_error("tree_levels: cycle through " + c.id);
      }
    }
  }

  // children adjacency
  std::map<std::string, std::vector<const Cell*>> children;
  for (const Cell& c : tree.nodes) {
    auto it = tree.parent.find(c.id);
    if (it != tree.parent.end()) {
      children[it->second].push_back(&c);
    }
  }

  std::map<std::string, int> level;
  // Post-order from the root; acyclicity already established.
  auto resolve = [&](auto&& self, const Cell& c) -> int {
    if (auto it = level.find(c.id); it != level.end()) {
      return it->second;
    }
    int lv = 0;
    if (c.kind != CellKind::Sink) {
      lv = 1;  // childless buffers sit one above the sink plane
      for (const Cell* ch : children[c.id]) {
        lv = std::max(lv, 1 + self(self, *ch));
      }
    }
    level[c.id] = lv;
    return lv;
  };
  for (const Cell& c : tree.nodes) {
    if (c.id != root) {
      resolve(resolve, c);
    }
  }
  return level;
}

int tree_depth(const BufferedTree& tree)
{
  int depth = 0;
  for (const auto& [id, lv] : tree_levels(tree)) {
    depth = std::max(depth, lv);
  }
  return depth;
}

std::vector<LevelPair> tree_to_pairs(const BufferedTree& tree)
{
  const std::string& root = tree.driver().id;
  const auto level = tree_levels(tree);
  const int depth = tree_depth(tree);

  auto parent_of = [&](const std::string& id) -> std::string {
    auto it = tree.parent.find(id);
    return it == tree.parent.end() ? root : it->second;
  };

  std::vector<LevelPair> pairs;
  for (int i = 1; i <= depth + 1; ++i) {
    LevelPair pair;
    pair.input.push_back(root);
    // Active nodes: created by level i-1 and not yet parented. A node's
    // parent is assigned at the pair whose index equals the parent level;
    // driver-parented nodes stay active until the terminating pair.
    std::vector<std::string> active;
    for (const Cell& c : tree.nodes) {
      if (c.id == root) {
        continue;
      }
      const int own = level.at(c.id);
      if (own > i - 1) {
        continue;  // not created yet
      }
      const std::string par = parent_of(c.id);
      const int par_level = par == root ? depth + 1 : level.at(par);
      if (par_level >= i) {
        active.push_back(c.id);
      }
    }
    std::sort(active.begin(), active.end());
    for (const std::string& id : active) {
      pair.input.push_back(id);
      const std::string par = parent_of(id);
      const bool assigned_here = par != root && level.at(par) == i;
      pair.labels[id] =
          assigned_here ? std::optional<std::string>(par) : std::nullopt;
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

BufferedTree replay_pairs(const BufferedTree& original,
                          const std::vector<LevelPair>& pairs)
{
  BufferedTree t;
  t.net_id = original.net_id;
  t.nodes = original.nodes;
  t.infeasible = original.infeasible;
  const std::string& root = t.driver().id;
  for (const LevelPair& pair : pairs) {
    for (const auto& [child, parent] : pair.labels) {
      if (parent.has_value()) {
        t.parent[child] = *parent;
      }
    }
  }
  for (const Cell& c : t.nodes) {
    if (c.id != root && !t.parent.count(c.id)) {
      t.parent[c.id] = root;
    }
  }
  return t;
}

bool trees_isomorphic(const BufferedTree& a, const BufferedTree& b)
{
  if (a.net_id != b.net_id || a.nodes.size() != b.nodes.size()) {
    return false;
  }
  std::set<std::string> ids_a, ids_b;
  for (const Cell& c : a.nodes) {
    ids_a.insert(c.id);
  }
  for (const Cell& c : b.nodes) {
    ids_b.insert(c.id);
  }
  if (ids_a != ids_b) {
    return false;
  }
  return a.parent == b.parent;
}

}  // namespace vbuf
