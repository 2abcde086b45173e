#include <algorithm>
#include <cmath>

#include "vbuf/pipeline.hpp"
#include "vbuf/rng.hpp"

namespace vbuf::pipeline {

Technology default_technology()
{
  Technology t;
  t.lib.buffers = {
      {"BUF_S2", 1.12, 1.5, 180.0, 25.0, 0.8, 1.4, 20},
      {"BUF_S4", 1.68, 2.2, 120.0, 45.0, 1.2, 1.4, 20},
      {"BUF_S8", 2.80, 3.4, 80.0, 80.0, 2.0, 1.4, 20},
      {"BUF_S16", 4.48, 5.2, 55.0, 140.0, 3.2, 1.4, 20},
      {"BUF_S32", 7.28, 8.0, 38.0, 240.0, 5.2, 1.4, 20},
  };
  t.params.unit_wire_cap = 0.2;
  t.params.unit_wire_res = 1.0;
  t.params.alpha = 1.1;
  t.params.beta = 0.85;
  t.params.max_wirelength = 60.0;
  t.params.max_slew = 10.0;
  t.params.ohm_ff_to_ps = 1e-3;
  return t;
}

Design gen_design(const DesignSpec& spec, uint64_t seed)
{
  Design d;
  Rng cell_rng = Rng::sub(seed, "gen-cells");
  Rng net_rng = Rng::sub(seed, "gen-nets");

  // Movable standard cells on a fixed row height.
  const double row_h = 1.4;
  double total_area = 0.0;
  for (int i = 0; i < spec.movable_cells; ++i) {
    DesignCell c;
    c.id = "c" + std::to_string(i);
    c.width = cell_rng.uniform(0.8, 3.2);
    c.height = row_h;
    c.movable = true;
    total_area += c.area();
    d.cells.push_back(std::move(c));
  }
  const double side = std::ceil(std::sqrt(total_area / spec.utilization));
  d.region = {0.0, 0.0, side, side};
  for (DesignCell& c : d.cells) {
    c.x = cell_rng.uniform(c.width / 2, side - c.width / 2);
    c.y = cell_rng.uniform(c.height / 2, side - c.height / 2);
  }

  // Fixed zero-area terminals around the boundary.
  const int n_term = std::max(4, spec.fixed_terminals);
  for (int i = 0; i < n_term; ++i) {
    DesignCell t;
    t.id = "io" + std::to_string(i);
    t.movable = false;
    const double frac = static_cast<double>(i) / n_term;
    const double along = frac * 4.0;
    if (along < 1.0) {
      t.x = along * side;
      t.y = 0.0;
    } else if (along < 2.0) {
      t.x = side;
      t.y = (along - 1.0) * side;
    } else if (along < 3.0) {
      t.x = (3.0 - along) * side;
      t.y = side;
    } else {
      t.x = 0.0;
      t.y = (4.0 - along) * side;
    }
    d.cells.push_back(std::move(t));
  }

  const int n_nets =
      static_cast<int>(std::lround(spec.movable_cells * spec.nets_per_cell));
  const int first_term = spec.movable_cells;

  auto random_movable = [&](int exclude) {
    int pick = exclude;
    while (pick == exclude) {
      pick = static_cast<int>(net_rng.uniform_int(0, spec.movable_cells - 1));
    }
    return pick;
  };

  for (int i = 0; i < n_nets; ++i) {
    DesignNet net;
    net.id = "n" + std::to_string(i);

    // Most nets are driven by a movable cell in round-robin order; a few
    // come in from the boundary terminals.
    if (net_rng.uniform() < 0.08) {
      net.driver =
          first_term + static_cast<int>(net_rng.uniform_int(0, n_term - 1));
    } else {
      net.driver = i % spec.movable_cells;
    }
    net.driver_out_res = net_rng.uniform(80.0, 200.0);
    net.driver_max_cap = net_rng.uniform(25.0, 60.0);
    net.driver_max_fanout =
        static_cast<int>(net_rng.uniform_int(8, 16));
    net.driver_out_slew = net_rng.uniform(5.0, 15.0);

    const double kind = net_rng.uniform();
    int fanout;
    bool fat = false;
    if (kind < spec.fat_sink_fraction) {
      fanout = 3;
      fat = true;
    } else if (kind < spec.fat_sink_fraction + spec.high_fanout_fraction) {
      fanout = static_cast<int>(
          net_rng.uniform_int(spec.high_fanout_lo, spec.high_fanout_hi));
    } else {
      fanout = static_cast<int>(
          net_rng.uniform_int(spec.fanout_lo, spec.fanout_hi));
    }
    std::vector<int> seen{net.driver};
    for (int s = 0; s < fanout; ++s) {
      int pick = random_movable(net.driver);
      // Allow occasional repeats only across nets, not within one.
      int guard = 0;
      while (std::find(seen.begin(), seen.end(), pick) != seen.end()
             && guard++ < 64) {
        pick = random_movable(net.driver);
      }
      seen.push_back(pick);
      net.sinks.push_back(pick);
      net.sink_caps.push_back(net_rng.uniform(1.0, 3.0));
    }
    if (fat) {
      // One sink no buffer in the library can legally drive.
      net.sink_caps.back() = net_rng.uniform(260.0, 340.0);
    }
    d.nets.push_back(std::move(net));
  }
  return d;
}

}  // namespace vbuf::pipeline
