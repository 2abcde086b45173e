#pragma once

#include <string>
#include <vector>

#include "vbuf/geometry.hpp"
#include "vbuf/netlist.hpp"

namespace vbuf {

struct DesignCell {
  std::string id;
  double width = 0.0;
  double height = 0.0;
  bool movable = true;
  double x = 0.0;  // center
  double y = 0.0;

  Pt loc() const { return {x, y}; }
  double area() const { return width * height; }
};

// A net at the design level: pin-to-cell bindings plus the electrical
// givens needed to materialize a standalone Net at any placement state.
struct DesignNet {
  std::string id;
  int driver = -1;
  std::vector<int> sinks;
  double driver_out_res = 0.0;
  double driver_max_cap = 0.0;
  int driver_max_fanout = 0;
  double driver_out_slew = 0.0;
  std::vector<double> sink_caps;
};

struct Design {
  Rect region;
  std::vector<DesignCell> cells;
  std::vector<DesignNet> nets;

  Net materialize(int net_idx) const;
  Net materialize(int net_idx, const std::vector<Pt>& positions) const;
  double movable_area() const;
};

Design load_design(const std::string& path);
void save_design(const Design& design, const std::string& path);

struct Technology {
  BufferLibrary lib;
  TechParams params;
};

Technology load_tech(const std::string& path);
void save_tech(const Technology& tech, const std::string& path);

// Standalone problematic-net snapshots taken at placement triggers.
struct NetSnapshot {
  int trigger_index = 0;
  double threshold = 0.0;
  std::vector<Net> nets;
};

void save_snapshots(const std::vector<NetSnapshot>& snaps, const Rect& region,
                    const std::string& path);
std::vector<NetSnapshot> load_snapshots(const std::string& path,
                                        Rect* region = nullptr);

}  // namespace vbuf
