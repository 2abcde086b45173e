#pragma once

#include <string>
#include <vector>

#include "vbuf/geometry.hpp"

namespace vbuf {

enum class CellKind { Driver, Sink, Buffer };

// Electrical state of one cell's pins. -1 marks "not applicable to this
// cell kind"; feature extraction reads fields directly without optionals.
struct ElectricalState {
  double input_cap = -1.0;    // fF
  double output_cap = -1.0;   // fF, downstream load seen by the output pin
  double input_slew = -1.0;   // ps
  double output_slew = -1.0;  // ps
  double max_cap = -1.0;      // fF, limit on output load
  int max_fanout = -1;        // limit on direct fanout count
  double output_res = -1.0;   // ohms
};

struct Cell {
  std::string id;
  CellKind kind = CellKind::Sink;
  double x = 0.0;  // center, microns
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;
  ElectricalState elec;
  // Library cell name for inserted buffers; empty for drivers and sinks.
  std::string buffer_spec;

  Pt loc() const { return {x, y}; }
};

// One net: a driver pin plus its sinks, each with live locations.
struct Net {
  std::string id;
  Cell driver;
  std::vector<Cell> sinks;

  int pin_count() const { return 1 + static_cast<int>(sinks.size()); }
};

struct BufferSpec {
  std::string name;
  double area = 0.0;  // um^2
  double input_cap = 0.0;
  double output_res = 0.0;
  double max_output_cap = 0.0;
  double width = 0.0;
  double height = 0.0;
  int max_fanout = 20;
};

struct BufferLibrary {
  std::vector<BufferSpec> buffers;

  const BufferSpec& smallest() const;           // by area, ties by name
  int index_of(const std::string& name) const;  // -1 if unknown
  int size() const { return static_cast<int>(buffers.size()); }
};

struct TechParams {
  double unit_wire_cap = 0.2;   // fF/um
  double unit_wire_res = 1.0;   // ohm/um
  double alpha = 1.0;           // wirelength scaling
  double beta = 1.0;            // slew fitting factor
  double max_wirelength = 0.0;  // um
  double max_slew = 0.0;        // ps
  // Unit bridge: ohm * fF -> ps. Declared here because the slew formula
  // leaves its unit system implicit.
  double ohm_ff_to_ps = 1e-3;
};

// Structural diagnostics; an empty list means the net is well-formed.
std::vector<std::string> validate_net(const Net& net, const TechParams& tech);

// Creates a buffer cell instance of the given spec at a location.
Cell make_buffer_cell(const std::string& id, const BufferSpec& spec, Pt at);

}  // namespace vbuf
