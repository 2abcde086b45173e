#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vbuf/design.hpp"
#include "vbuf/oracle.hpp"
#include "vbuf/tree.hpp"

namespace vbuf::model {
class BufferModel;
}

namespace vbuf::place {

// Placement bins. Capacity starts at bin area scaled by the target
// density; virtual occupancy subtracts from it, never below zero.
struct BinGrid {
  Rect region;
  int nx = 0;
  int ny = 0;
  std::vector<double> density;        // D_j
  std::vector<double> base_capacity;  // area * D_j
  std::vector<double> capacity;       // A_grid after virtual reduction
  std::vector<double> cell_area;      // A'_cell
  std::vector<double> overflow;

  static BinGrid make(const Rect& region, int nx, int ny,
                      double target_density);

  int index(int ix, int iy) const { return iy * nx + ix; }
  double bin_w() const { return region.width() / nx; }
  double bin_h() const { return region.height() / ny; }
  Rect bin_rect(int ix, int iy) const;
  void reset_virtual();  // capacity back to base
};

struct VirtualBufferBox {
  Rect bounds;
  std::string source_net;
};

double overlap_area(const Rect& a, const Rect& b);

// Subtracts density-scaled overlap from every bin; returns the pre-clamp
// total reduction (conservation handle for verification).
double apply_virtual_occupancy(BinGrid& grid,
                               const std::vector<VirtualBufferBox>& boxes);

// Recomputes per-bin movable cell area and overflow; returns the global
// overflow ratio (total overflow / total movable area).
double bin_overflow(BinGrid& grid,
                    const std::vector<DesignCell>& cells,
                    const std::vector<Pt>& positions);

enum class Strategy { None, Model, Oracle, AdHoc };
Strategy strategy_from_string(const std::string& name);
std::string strategy_name(Strategy s);

struct PlacerConfig {
  int grid_nx = 0;  // <= 0: size the grid for ~9 movable cells per bin
  int grid_ny = 0;
  double target_density = 0.75;
  int max_iterations = 4000;
  int min_iterations = 150;  // keep refining wirelength when density is easy
  double stop_overflow = 0.08;
  double gamma_bins = 4.0;      // WA smoothing, in bin widths
  double gamma_anneal = 0.98;   // applied every 10 iterations
  double density_weight = 0.3;  // initial lambda
  double density_growth = 1.05;
  double density_weight_max = 64.0;
  double step_fraction = 0.12;  // of bin width, per iteration
  int smooth_passes = 2;
  std::vector<double> overflow_list = {0.7,  0.65, 0.6,  0.55, 0.5,
                                       0.45, 0.4,  0.35, 0.3,  0.25,
                                       0.2,  0.15, 0.1};
  oracle::DpConfig dp;
};

struct TriggerEvent {
  int iteration = 0;
  double threshold = 0.0;
  int problematic_nets = 0;
  int boxes = 0;
};

struct TrajectoryPoint {
  int iteration = 0;
  double overflow = 0.0;
  double hpwl = 0.0;
  int triggers_fired = 0;
};

struct PlaceResult {
  std::vector<Pt> positions;
  std::vector<TrajectoryPoint> trajectory;
  std::vector<TriggerEvent> triggers;
  std::vector<NetSnapshot> snapshots;  // problematic nets per trigger
  bool converged = false;
  double final_overflow = 0.0;
  double final_hpwl = 0.0;
};

// Observer invoked for every tree a buffering strategy produces.
using TreeObserver =
    std::function<void(int trigger_index, const Net&, const BufferedTree&)>;

PlaceResult place(const Design& design,
                  const Technology& tech,
                  Strategy strategy,
                  const PlacerConfig& cfg,
                  uint64_t seed,
                  const model::BufferModel* model = nullptr,
                  const TreeObserver& observer = nullptr);

// Net indices failing ERC at the given placement, plus long nets.
std::vector<int> problematic_nets(const Design& design,
                                  const std::vector<Pt>& positions,
                                  const TechParams& tech);

// Rule-based allocation: margined wirelength, load-derived buffer count,
// boxes skewed toward the driver-distal half of the net bounding box.
std::vector<VirtualBufferBox> adhoc_virtual_buffers(const Net& net,
                                                    const BufferLibrary& lib,
                                                    const TechParams& tech);

std::vector<VirtualBufferBox> boxes_from_tree(const BufferedTree& tree);

double total_hpwl(const Design& design, const std::vector<Pt>& positions);

}  // namespace vbuf::place
