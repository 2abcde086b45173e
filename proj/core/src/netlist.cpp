#include "vbuf/netlist.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace vbuf {

const BufferSpec& BufferLibrary::smallest() const
{
  if (buffers.empty()) {
    throw std::logic_error("buffer library is empty");
  }
  const BufferSpec* best = &buffers[0];
  for (const BufferSpec& b : buffers) {
    if (b.area < best->area
        || (b.area == best->area && b.name < best->name)) {
      best = &b;
    }
  }
  return *best;
}

int BufferLibrary::index_of(const std::string& name) const
{
  for (int i = 0; i < size(); ++i) {
    if (buffers[i].name == name) {
      return i;
    }
  }
  return -1;
}

std::vector<std::string> validate_net(const Net& net, const TechParams& tech)
{
  std::vector<std::string> issues;
  if (net.driver.kind != CellKind::Driver) {
    issues.push_back("driver cell is not of Driver kind");
  }
  if (net.sinks.empty()) {
    issues.push_back("empty sink set");
  }
  std::set<std::string> seen;
  for (const Cell& s : net.sinks) {
    if (s.kind != CellKind::Sink) {
      issues.push_back("sink " + s.id + " is not of Sink kind");
    }
    if (s.id == net.driver.id) {
      issues.push_back("sink " + s.id + " duplicates the driver id");
    }
    if (!seen.insert(s.id).second) {
      issues.push_back("duplicate sink " + s.id);
    }
    if (s.width < 0 || s.height < 0) {
      issues.push_back("negative dimensions on " + s.id);
    }
    if (s.elec.input_cap < 0) {
      issues.push_back("sink " + s.id + " missing input capacitance");
    }
  }
  if (net.driver.width < 0 || net.driver.height < 0) {
    issues.push_back("negative dimensions on driver " + net.driver.id);
  }
  if (net.driver.elec.max_cap <= 0) {
    issues.push_back("driver max_cap must be positive");
  }
  if (net.driver.elec.max_fanout < 1) {
    issues.push_back("driver max_fanout must be at least 1");
  }
  if (tech.max_wirelength <= 0 || tech.max_slew <= 0) {
    issues.push_back("tech limits must be strictly positive");
  }
  return issues;
}

Cell make_buffer_cell(const std::string& id, const BufferSpec& spec, Pt at)
{
  Cell c;
  c.id = id;
  c.kind = CellKind::Buffer;
  c.x = at.x;
  c.y = at.y;
  c.width = spec.width;
  c.height = spec.height;
  c.buffer_spec = spec.name;
  c.elec.input_cap = spec.input_cap;
  c.elec.max_cap = spec.max_output_cap;
  c.elec.max_fanout = spec.max_fanout;
  c.elec.output_res = spec.output_res;
  return c;
}

}  // namespace vbuf
