#pragma once

#include <map>
#include <string>
#include <vector>

#include "vbuf/netlist.hpp"
#include "vbuf/tree.hpp"

namespace vbuf {

// Output load of a driving pin: scaled bounding-box wire capacitance plus
// the input capacitances of its direct children.
double estimate_output_cap(const Cell& head,
                           const std::vector<const Cell*>& children,
                           const TechParams& tech);

// Output slew of a driving pin: (R_drvr + R_wire) * C_out * beta, in ps.
// Children inherit this value as their input slew.
double estimate_output_slew(const Cell& head,
                            double c_out,
                            double stage_hpwl,
                            const TechParams& tech);

enum class ErcKind { Slew, Cap, Fanout, Wirelength };

struct ErcViolation {
  std::string net_id;
  std::string pin_id;  // the driving pin (driver or buffer)
  ErcKind kind = ErcKind::Cap;
  double value = 0.0;
  double limit = 0.0;
};

struct ErcReport {
  int slew_violations = 0;
  int cap_violations = 0;
  int fanout_violations = 0;
  int wirelength_violations = 0;
  std::vector<ErcViolation> details;

  int total() const
  {
    return slew_violations + cap_violations + fanout_violations
           + wirelength_violations;
  }
  int cap_fanout() const { return cap_violations + fanout_violations; }
  void add(ErcViolation v);
  void merge(const ErcReport& other);
  std::string to_json() const;
};

// Checks the unbuffered net: the driver drives every sink directly.
ErcReport check_erc(const Net& net, const TechParams& tech);

// Checks every driving stage of a buffer-embedded tree.
ErcReport check_erc(const BufferedTree& tree, const TechParams& tech);

struct ErcPenalty {
  double cap = 0.0;     // fF of excess, summed over driving pins
  double fanout = 0.0;  // count of excess
  double total() const { return cap + fanout; }
};

// ReLU excesses over C_max and O_max, summed over driving stages.
ErcPenalty penalty_erc(const BufferedTree& tree, const TechParams& tech);

// ReLU excess of alpha-scaled stage HPWL over W_max, summed over stages.
double penalty_wire(const BufferedTree& tree, const TechParams& tech);

// W_area * ReLU(log A_total - log A_small); zero when no buffers exist.
double penalty_area(double total_area, double smallest_buffer_area,
                    double w_area);

// Fills in per-node electrical annotations (output cap/slew, input slews)
// for a finished tree by walking stages top-down.
void annotate_tree_electrics(BufferedTree& tree, const TechParams& tech);

// Analytic d(P_cap)/d(node location) and d(P_wire)/d(node location) for
// every tree node, using first-index tie-breaking at bounding-box ties and
// subgradient 0 at ReLU kinks. Used to cross-check the model's in-graph
// penalty path against finite differences.
struct PenaltyGradients {
  std::map<std::string, Pt> d_cap;
  std::map<std::string, Pt> d_wire;
};
PenaltyGradients penalty_gradients(const BufferedTree& tree,
                                   const TechParams& tech);

}  // namespace vbuf
