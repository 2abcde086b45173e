#include <algorithm>
#include <cmath>

#include "vbuf/model.hpp"

namespace vbuf::model {

namespace {

using ad::Tensor;

// Tentative stage update for the driver over every currently unparented
// node, mirroring the teacher-forcing replay in prepare_training_tree.
void refresh_driver_stage(Cell& driver, std::vector<Cell*>& active,
                          const TechParams& tech)
{
  if (active.empty()) {
    return;
  }
  std::vector<const Cell*> children(active.begin(), active.end());
  std::vector<Pt> pts{driver.loc()};
  for (const Cell* c : children) {
    pts.push_back(c->loc());
  }
  const double w = hpwl(pts);
  const double c_out = estimate_output_cap(driver, children, tech);
  const double s_out = estimate_output_slew(driver, c_out, w, tech);
  driver.elec.output_cap = c_out;
  driver.elec.output_slew = s_out;
  for (Cell* c : active) {
    c->elec.input_slew = s_out;
  }
}

}  // namespace

BufferedTree infer(const Net& net,
                   const BufferModel& model,
                   const BufferLibrary& lib,
                   const TechParams& tech,
                   const Rect* region,
                   InferStats* stats)
{
  const ModelConfig& cfg = model.config();
  // tree.nodes grows inside the loop; always re-fetch the driver.
  BufferedTree tree;
  tree.net_id = net.id;
  tree.nodes.push_back(net.driver);
  for (const Cell& s : net.sinks) {
    tree.nodes.push_back(s);
  }

  const Pt origin = tree.nodes[0].loc();

  // Active set: every created node still waiting for a parent.
  std::vector<std::string> active;
  for (const Cell& s : net.sinks) {
    active.push_back(s.id);
  }
  std::sort(active.begin(), active.end());

  int buffer_counter = 0;
  int iterations = 0;
  bool truncated = false;

  while (true) {
    {
      std::vector<Cell*> act;
      for (const std::string& id : active) {
        act.push_back(tree.find(id));
      }
      refresh_driver_stage(tree.nodes[0], act, tech);
    }
    if (iterations >= cfg.max_depth) {
      truncated = true;
      break;
    }

    std::vector<Cell> input;
    input.push_back(tree.nodes[0]);
    for (const std::string& id : active) {
      input.push_back(*tree.find(id));
    }
    const Tensor features = extract_features(input);

    ad::Graph g;
    const auto fw =
        model.forward(g, features, cfg.tau_end, nullptr, nullptr);
    const Tensor& m_val = fw.m.val();
    const Tensor& zt = fw.zc_type.val();
    const Tensor& zl = fw.zc_loc.val();

    const auto extracted =
        extract_clusters(m_val, zt, cfg.clusters);
    if (extracted.empty()) {
      break;
    }
    ++iterations;

    // Materialize one buffer per extracted cluster.
    std::map<int, std::string> cluster_buffer;
    for (int k : extracted) {
      int argmax = 0;
      for (int c = 1; c < zt.cols; ++c) {
        if (zt.at(k, c) > zt.at(k, argmax)) {
          argmax = c;
        }
      }
      const BufferSpec& spec = lib.buffers[argmax - 1];
      Pt at{origin.x + zl.at(k, 0), origin.y + zl.at(k, 1)};
      if (region != nullptr) {
        at.x = std::clamp(at.x, region->lx, region->rx);
        at.y = std::clamp(at.y, region->ly, region->ry);
      }
      const std::string name =
          net.id + "_p" + std::to_string(buffer_counter++);
      tree.nodes.push_back(make_buffer_cell(name, spec, at));
      cluster_buffer[k] = name;
    }

    // Parent every active node whose hard cluster was realized.
    std::vector<std::string> next_active;
    std::map<std::string, std::vector<std::string>> buffer_children;
    for (size_t i = 0; i < active.size(); ++i) {
      const int row = static_cast<int>(i) + 1;  // skip driver row
      int best = 0;
      for (int k = 1; k < cfg.clusters; ++k) {
        if (m_val.at(row, k) > m_val.at(row, best)) {
          best = k;
        }
      }
      auto it = cluster_buffer.find(best);
      if (it != cluster_buffer.end()) {
        tree.parent[active[i]] = it->second;
        buffer_children[it->second].push_back(active[i]);
      } else {
        next_active.push_back(active[i]);
      }
    }

    // New buffers drive their children; their upstream stage is settled
    // next iteration (or by the driver at the end).
    for (const auto& [k, name] : cluster_buffer) {
      Cell* buf = tree.find(name);
      const auto& kids = buffer_children[name];
      if (!kids.empty()) {
        std::vector<const Cell*> children;
        std::vector<Pt> pts{buf->loc()};
        for (const std::string& cid : kids) {
          children.push_back(tree.find(cid));
          pts.push_back(children.back()->loc());
        }
        const double w = hpwl(pts);
        const double c_out = estimate_output_cap(*buf, children, tech);
        const double s_out = estimate_output_slew(*buf, c_out, w, tech);
        buf->elec.output_cap = c_out;
        buf->elec.output_slew = s_out;
        for (const std::string& cid : kids) {
          tree.find(cid)->elec.input_slew = s_out;
        }
      }
      next_active.push_back(name);
    }
    std::sort(next_active.begin(), next_active.end());
    active = std::move(next_active);
  }

  for (const std::string& id : active) {
    tree.parent[id] = tree.nodes[0].id;
  }
  tree.depth_truncated = truncated;
  if (stats != nullptr) {
    stats->iterations = iterations;
    stats->truncated = truncated;
  }
  return tree;
}

}  // namespace vbuf::model
