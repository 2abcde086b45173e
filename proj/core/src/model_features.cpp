#include <algorithm>
#include <stdexcept>

#include "vbuf/electrics.hpp"
#include "vbuf/model.hpp"

namespace vbuf::model {

ad::Tensor extract_features(const std::vector<Cell>& cells)
{
  if (cells.empty() || cells[0].kind != CellKind::Driver) {
    throw std::invalid_argument("extract_features: driver must come first");
  }
  const Pt origin = cells[0].loc();
  ad::Tensor f(static_cast<int>(cells.size()), 12);
  for (int i = 0; i < f.rows; ++i) {
    const Cell& c = cells[i];
    f.at(i, 0) = c.kind == CellKind::Driver ? 1.0 : 0.0;
    f.at(i, 1) = c.kind == CellKind::Sink ? 1.0 : 0.0;
    f.at(i, 2) = c.kind == CellKind::Buffer ? 1.0 : 0.0;
    const double dx = c.x - origin.x;
    const double dy = c.y - origin.y;
    f.at(i, 3) = dx;
    f.at(i, 4) = dy;
    f.at(i, 5) = std::abs(dx) + std::abs(dy);
    f.at(i, 6) = c.kind == CellKind::Driver ? -1.0 : c.elec.input_slew;
    f.at(i, 7) = c.kind == CellKind::Sink ? -1.0 : c.elec.output_slew;
    f.at(i, 8) = c.kind == CellKind::Driver ? -1.0 : c.elec.input_cap;
    f.at(i, 9) = c.kind == CellKind::Sink ? -1.0 : c.elec.output_cap;
    f.at(i, 10) = c.kind == CellKind::Sink ? -1.0 : c.elec.max_cap;
    f.at(i, 11) = c.kind == CellKind::Sink ? -1.0 : c.elec.output_res;
  }
  return f;
}

namespace {

// Recomputes the tentative driver stage over the currently active
// children and propagates slews, mirroring the inference-time updates.
void update_driver_stage(Cell& driver, std::vector<Cell*>& active,
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

TrainingTree prepare_training_tree(const BufferedTree& tree,
                                   const BufferLibrary& lib,
                                   const TechParams& tech)
{
  TrainingTree out;
  out.tree = tree;
  annotate_tree_electrics(out.tree, tech);

  const auto pairs = tree_to_pairs(out.tree);
  const std::string root = out.tree.driver().id;
  const Pt origin = out.tree.driver().loc();

  for (const LevelPair& pair : pairs) {
    TrainingPair tp;
    // Working copies: active cells hang from the driver until labeled.
    std::vector<Cell> cells;
    for (const std::string& id : pair.input) {
      cells.push_back(*out.tree.find(id));
    }
    Cell& driver = cells[0];
    std::vector<Cell*> active;
    for (size_t i = 1; i < cells.size(); ++i) {
      active.push_back(&cells[i]);
    }
    update_driver_stage(driver, active, tech);
    tp.cells = std::move(cells);

    tp.targets.resize(tp.cells.size());
    for (size_t i = 1; i < tp.cells.size(); ++i) {
      const auto& label = pair.labels.at(tp.cells[i].id);
      if (label.has_value()) {
        const Cell* parent = out.tree.find(*label);
        TrainingPair::Target t;
        t.has_parent = true;
        t.parent_id = *label;
        t.lib_index = lib.index_of(parent->buffer_spec);
        t.parent_rel = {parent->x - origin.x, parent->y - origin.y};
        tp.targets[i] = std::move(t);
      }
    }
    out.pairs.push_back(std::move(tp));
  }
  return out;
}

}  // namespace vbuf::model
