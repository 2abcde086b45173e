#include <algorithm>
#include <cmath>

#include "vbuf/model.hpp"
#include "vbuf/placer.hpp"
#include "vbuf/rng.hpp"

namespace vbuf::place {

namespace {

// Weighted-average smooth wirelength gradient for one axis of one net.
// coord/weight arrays hold the pin coordinates; grad accumulates d(WA+ -
// WA-)/d(coord).
void wa_axis_grad(const std::vector<double>& coord, double gamma,
                  std::vector<double>& grad)
{
  const size_t n = coord.size();
  double cmax = coord[0], cmin = coord[0];
  for (double c : coord) {
    cmax = std::max(cmax, c);
    cmin = std::min(cmin, c);
  }
  double sp = 0.0, wp = 0.0, sm = 0.0, wm = 0.0;
  std::vector<double> ap(n), am(n);
  for (size_t i = 0; i < n; ++i) {
    ap[i] = std::exp((coord[i] - cmax) / gamma);
    am[i] = std::exp(-(coord[i] - cmin) / gamma);
    sp += ap[i];
    wp += coord[i] * ap[i];
    sm += am[i];
    wm += coord[i] * am[i];
  }
  const double wa_p = wp / sp;
  const double wa_m = wm / sm;
  for (size_t i = 0; i < n; ++i) {
    const double dp = ap[i] / sp * (1.0 + (coord[i] - wa_p) / gamma);
    const double dm = am[i] / sm * (1.0 - (coord[i] - wa_m) / gamma);
    grad[i] += dp - dm;
  }
}

// Box-blurred overflow field; the placer pushes cells down its slope.
std::vector<double> smooth_overflow_field(const BinGrid& grid, int passes)
{
  const int nx = grid.nx, ny = grid.ny;
  const double bin_area = grid.region.area() / (nx * ny);
  std::vector<double> field(nx * ny);
  for (int b = 0; b < nx * ny; ++b) {
    field[b] = grid.overflow[b] / bin_area;
  }
  std::vector<double> next(field.size());
  for (int p = 0; p < passes; ++p) {
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const auto at = [&](int x, int y) {
          x = std::clamp(x, 0, nx - 1);
          y = std::clamp(y, 0, ny - 1);
          return field[grid.index(x, y)];
        };
        next[grid.index(ix, iy)] =
            (4.0 * at(ix, iy) + at(ix - 1, iy) + at(ix + 1, iy)
             + at(ix, iy - 1) + at(ix, iy + 1))
            / 8.0;
      }
    }
    std::swap(field, next);
  }
  return field;
}

std::vector<Pt> initial_positions(const Design& design, const BinGrid& grid,
                                  uint64_t seed)
{
  std::vector<Pt> pos(design.cells.size());
  for (size_t c = 0; c < design.cells.size(); ++c) {
    pos[c] = design.cells[c].loc();
  }
  // Movable cells start at the centroid of the fixed terminals on their
  // nets, center of the region otherwise, with one bin of jitter.
  std::vector<double> sx(design.cells.size(), 0.0);
  std::vector<double> sy(design.cells.size(), 0.0);
  std::vector<int> cnt(design.cells.size(), 0);
  for (const DesignNet& net : design.nets) {
    std::vector<int> members{net.driver};
    members.insert(members.end(), net.sinks.begin(), net.sinks.end());
    for (int a : members) {
      if (design.cells[a].movable) {
        continue;
      }
      for (int b : members) {
        if (design.cells[b].movable) {
          sx[b] += design.cells[a].x;
          sy[b] += design.cells[a].y;
          cnt[b] += 1;
        }
      }
    }
  }
  Rng rng = Rng::sub(seed, "placer-init");
  const Pt center = grid.region.center();
  const double jitter = grid.bin_w();
  for (size_t c = 0; c < design.cells.size(); ++c) {
    if (!design.cells[c].movable) {
      continue;
    }
    // Three quarters of the way from the terminal centroid to the region
    // center: the run starts compact enough that the overflow schedule
    // unwinds from its top threshold.
    Pt p = cnt[c] > 0 ? Pt{sx[c] / cnt[c], sy[c] / cnt[c]} : center;
    p.x = 0.25 * p.x + 0.75 * center.x + rng.uniform(-jitter, jitter);
    p.y = 0.25 * p.y + 0.75 * center.y + rng.uniform(-jitter, jitter);
    pos[c] = p;
  }
  return pos;
}

std::vector<VirtualBufferBox> run_strategy(
    const Design& design,
    const std::vector<Pt>& positions,
    const std::vector<int>& nets,
    const Technology& tech,
    Strategy strategy,
    const PlacerConfig& cfg,
    const model::BufferModel* mdl,
    int trigger_index,
    const TreeObserver& observer,
    std::vector<Net>* snapshot_nets)
{
  std::vector<VirtualBufferBox> boxes;
  for (int idx : nets) {
    const Net net = design.materialize(idx, positions);
    if (snapshot_nets != nullptr) {
      snapshot_nets->push_back(net);
    }
    try {
      switch (strategy) {
        case Strategy::None:
          break;
        case Strategy::Oracle: {
          const BufferedTree tree =
              oracle::dp_buffer(net, tech.lib, tech.params, cfg.dp);
          if (observer) {
            observer(trigger_index, net, tree);
          }
          const auto nb = boxes_from_tree(tree);
          boxes.insert(boxes.end(), nb.begin(), nb.end());
          break;
        }
        case Strategy::Model: {
          const BufferedTree tree = model::infer(net, *mdl, tech.lib,
                                                 tech.params,
                                                 &design.region);
          if (observer) {
            observer(trigger_index, net, tree);
          }
          const auto nb = boxes_from_tree(tree);
          boxes.insert(boxes.end(), nb.begin(), nb.end());
          break;
        }
        case Strategy::AdHoc: {
          const auto nb = adhoc_virtual_buffers(net, tech.lib, tech.params);
          boxes.insert(boxes.end(), nb.begin(), nb.end());
          break;
        }
      }
    } catch (const std::exception&) {
      // Engine failure on one net: skip it, keep placing.
      continue;
    }
  }
  return boxes;
}

}  // namespace

PlaceResult place(const Design& design,
                  const Technology& tech,
                  Strategy strategy,
                  const PlacerConfig& cfg,
                  uint64_t seed,
                  const model::BufferModel* mdl,
                  const TreeObserver& observer)
{
  int nx = cfg.grid_nx;
  int ny = cfg.grid_ny;
  if (nx <= 0 || ny <= 0) {
    int movable = 0;
    for (const DesignCell& c : design.cells) {
      movable += c.movable ? 1 : 0;
    }
    const int n = std::clamp(
        static_cast<int>(std::lround(std::sqrt(movable / 9.0))), 6, 64);
    nx = ny = n;
  }
  BinGrid grid = BinGrid::make(design.region, nx, ny, cfg.target_density);
  std::vector<Pt> pos = initial_positions(design, grid, seed);

  PlaceResult result;
  std::vector<double> pending = cfg.overflow_list;
  std::sort(pending.begin(), pending.end(), std::greater<double>());

  double lambda = cfg.density_weight;
  double gamma = cfg.gamma_bins * grid.bin_w();
  const double step0 = cfg.step_fraction * grid.bin_w();

  std::vector<double> gx(design.cells.size());
  std::vector<double> gy(design.cells.size());

  double ratio = bin_overflow(grid, design.cells, pos);
  int iter = 0;
  for (; iter < cfg.max_iterations
         && (ratio > cfg.stop_overflow || iter < cfg.min_iterations);
       ++iter) {
    // Wirelength gradient.
    std::fill(gx.begin(), gx.end(), 0.0);
    std::fill(gy.begin(), gy.end(), 0.0);
    std::vector<double> cx, cy, dgx, dgy;
    for (const DesignNet& net : design.nets) {
      std::vector<int> members{net.driver};
      members.insert(members.end(), net.sinks.begin(), net.sinks.end());
      if (members.size() < 2) {
        continue;
      }
      cx.clear();
      cy.clear();
      for (int m : members) {
        cx.push_back(pos[m].x);
        cy.push_back(pos[m].y);
      }
      dgx.assign(members.size(), 0.0);
      dgy.assign(members.size(), 0.0);
      wa_axis_grad(cx, gamma, dgx);
      wa_axis_grad(cy, gamma, dgy);
      for (size_t i = 0; i < members.size(); ++i) {
        gx[members[i]] += dgx[i];
        gy[members[i]] += dgy[i];
      }
    }

    // Density force from the smoothed overflow field.
    const std::vector<double> field =
        smooth_overflow_field(grid, cfg.smooth_passes);
    // Bilinear sample over bin centers so co-located cells still get
    // position-dependent directions.
    auto field_at = [&](double x, double y) {
      const double fx = (x - grid.region.lx) / grid.bin_w() - 0.5;
      const double fy = (y - grid.region.ly) / grid.bin_h() - 0.5;
      const int ix = static_cast<int>(std::floor(fx));
      const int iy = static_cast<int>(std::floor(fy));
      const double tx = fx - ix;
      const double ty = fy - iy;
      auto v = [&](int bx, int by) {
        bx = std::clamp(bx, 0, grid.nx - 1);
        by = std::clamp(by, 0, grid.ny - 1);
        return field[grid.index(bx, by)];
      };
      return (1 - tx) * (1 - ty) * v(ix, iy) + tx * (1 - ty) * v(ix + 1, iy)
             + (1 - tx) * ty * v(ix, iy + 1) + tx * ty * v(ix + 1, iy + 1);
    };

    const double step = step0;
    const double bw = grid.bin_w();
    for (size_t c = 0; c < design.cells.size(); ++c) {
      if (!design.cells[c].movable) {
        continue;
      }
      const int ix = std::clamp(
          static_cast<int>((pos[c].x - grid.region.lx) / grid.bin_w()), 0,
          grid.nx - 1);
      const int iy = std::clamp(
          static_cast<int>((pos[c].y - grid.region.ly) / grid.bin_h()), 0,
          grid.ny - 1);
      const double dfx = 0.5
                         * (field_at(pos[c].x + bw, pos[c].y)
                            - field_at(pos[c].x - bw, pos[c].y));
      const double dfy = 0.5
                         * (field_at(pos[c].x, pos[c].y + bw)
                            - field_at(pos[c].x, pos[c].y - bw));

      // Density displacement is self-limiting: it scales with the share
      // of the bin's area that actually has to leave, so cells stop
      // shuttling once their bin fits.
      const int b = grid.index(ix, iy);
      const double excess_frac =
          grid.overflow[b] / std::max(grid.cell_area[b], 1e-9);
      const double norm = std::hypot(dfx, dfy);
      double den_x = 0.0, den_y = 0.0;
      if (norm > 1e-12 && excess_frac > 0.0) {
        const double mag = bw * std::min(3.0 * excess_frac, 1.0)
                           * std::min(lambda * norm, 1.0);
        den_x = -mag * dfx / norm;
        den_y = -mag * dfy / norm;
      }

      double dx = -step * gx[c] + den_x;
      double dy = -step * gy[c] + den_y;
      dx = std::clamp(dx, -bw, bw);
      dy = std::clamp(dy, -bw, bw);
      pos[c].x = std::clamp(pos[c].x + dx,
                            design.region.lx + design.cells[c].width / 2,
                            design.region.rx - design.cells[c].width / 2);
      pos[c].y = std::clamp(pos[c].y + dy,
                            design.region.ly + design.cells[c].height / 2,
                            design.region.ry - design.cells[c].height / 2);
    }

    lambda = std::min(lambda * cfg.density_growth, cfg.density_weight_max);
    if ((iter + 1) % 10 == 0) {
      gamma *= cfg.gamma_anneal;
    }

    ratio = bin_overflow(grid, design.cells, pos);

    // Fire every schedule threshold the ratio has crossed.
    int fired = 0;
    while (!pending.empty() && ratio < pending.front()) {
      const double threshold = pending.front();
      pending.erase(pending.begin());
      const auto nets = problematic_nets(design, pos, tech.params);
      NetSnapshot snap;
      snap.trigger_index = static_cast<int>(result.triggers.size());
      snap.threshold = threshold;
      const auto boxes = run_strategy(design, pos, nets, tech, strategy,
                                      cfg, mdl, snap.trigger_index, observer,
                                      &snap.nets);
      grid.reset_virtual();
      apply_virtual_occupancy(grid, boxes);
      ratio = bin_overflow(grid, design.cells, pos);

      TriggerEvent ev;
      ev.iteration = iter;
      ev.threshold = threshold;
      ev.problematic_nets = static_cast<int>(nets.size());
      ev.boxes = static_cast<int>(boxes.size());
      result.triggers.push_back(ev);
      result.snapshots.push_back(std::move(snap));
      ++fired;
    }

    if (iter % 5 == 0 || fired > 0) {
      result.trajectory.push_back(
          {iter, ratio, total_hpwl(design, pos), fired});
    }
  }

  // A run that converged below every threshold must have fired them all.
  while (ratio <= cfg.stop_overflow && !pending.empty()) {
    const double threshold = pending.front();
    pending.erase(pending.begin());
    const auto nets = problematic_nets(design, pos, tech.params);
    NetSnapshot snap;
    snap.trigger_index = static_cast<int>(result.triggers.size());
    snap.threshold = threshold;
    const auto boxes = run_strategy(design, pos, nets, tech, strategy, cfg,
                                    mdl, snap.trigger_index, observer,
                                    &snap.nets);
    grid.reset_virtual();
    apply_virtual_occupancy(grid, boxes);
    TriggerEvent ev;
    ev.iteration = iter;
    ev.threshold = threshold;
    ev.problematic_nets = static_cast<int>(nets.size());
    ev.boxes = static_cast<int>(boxes.size());
    result.triggers.push_back(ev);
    result.snapshots.push_back(std::move(snap));
  }

  result.positions = std::move(pos);
  result.converged = ratio <= cfg.stop_overflow;
  result.final_overflow = ratio;
  result.final_hpwl = total_hpwl(design, result.positions);
  result.trajectory.push_back({iter, ratio, result.final_hpwl, 0});
  return result;
}

}  // namespace vbuf::place
