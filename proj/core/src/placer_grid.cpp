#include <algorithm>
#include <stdexcept>

#include "vbuf/placer.hpp"

namespace vbuf::place {

BinGrid BinGrid::make(const Rect& region, int nx, int ny,
                      double target_density)
{
  if (nx <= 0 || ny <= 0 || target_density <= 0.0 || target_density > 1.0) {
    throw std::invalid_argument("BinGrid: bad grid spec");
  }
  BinGrid g;
  g.region = region;
  g.nx = nx;
  g.ny = ny;
  const int n = nx * ny;
  const double cap = (region.area() / n) * target_density;
  g.density.assign(n, target_density);
  g.base_capacity.assign(n, cap);
  g.capacity = g.base_capacity;
  g.cell_area.assign(n, 0.0);
  g.overflow.assign(n, 0.0);
  return g;
}

Rect BinGrid::bin_rect(int ix, int iy) const
{
  const double bw = bin_w();
  const double bh = bin_h();
  return {region.lx + ix * bw, region.ly + iy * bh,
          region.lx + (ix + 1) * bw, region.ly + (iy + 1) * bh};
}

void BinGrid::reset_virtual()
{
  capacity = base_capacity;
}

double overlap_area(const Rect& a, const Rect& b)
{
  const double w = std::min(a.rx, b.rx) - std::max(a.lx, b.lx);
  const double h = std::min(a.ry, b.ry) - std::max(a.ly, b.ly);
  return std::max(0.0, w) * std::max(0.0, h);
}

double apply_virtual_occupancy(BinGrid& grid,
                               const std::vector<VirtualBufferBox>& boxes)
{
  double reduction = 0.0;
  for (const VirtualBufferBox& box : boxes) {
    // Restrict to the bins the box can touch.
    const double bw = grid.bin_w();
    const double bh = grid.bin_h();
    int ix0 = static_cast<int>((box.bounds.lx - grid.region.lx) / bw);
    int ix1 = static_cast<int>((box.bounds.rx - grid.region.lx) / bw);
    int iy0 = static_cast<int>((box.bounds.ly - grid.region.ly) / bh);
    int iy1 = static_cast<int>((box.bounds.ry - grid.region.ly) / bh);
    ix0 = std::clamp(ix0, 0, grid.nx - 1);
    ix1 = std::clamp(ix1, 0, grid.nx - 1);
    iy0 = std::clamp(iy0, 0, grid.ny - 1);
    iy1 = std::clamp(iy1, 0, grid.ny - 1);
    for (int iy = iy0; iy <= iy1; ++iy) {
      for (int ix = ix0; ix <= ix1; ++ix) {
        const int b = grid.index(ix, iy);
        const double cut =
            overlap_area(box.bounds, grid.bin_rect(ix, iy)) * grid.density[b];
        if (cut > 0.0) {
          reduction += cut;
          grid.capacity[b] = std::max(0.0, grid.capacity[b] - cut);
        }
      }
    }
  }
  return reduction;
}

double bin_overflow(BinGrid& grid,
                    const std::vector<DesignCell>& cells,
                    const std::vector<Pt>& positions)
{
  std::fill(grid.cell_area.begin(), grid.cell_area.end(), 0.0);
  const double bw = grid.bin_w();
  const double bh = grid.bin_h();
  double movable_area = 0.0;
  for (size_t c = 0; c < cells.size(); ++c) {
    if (!cells[c].movable) {
      continue;
    }
    movable_area += cells[c].area();
    const Pt at = positions[c];
    const Rect fp{at.x - cells[c].width / 2, at.y - cells[c].height / 2,
                  at.x + cells[c].width / 2, at.y + cells[c].height / 2};
    int ix0 = static_cast<int>((fp.lx - grid.region.lx) / bw);
    int ix1 = static_cast<int>((fp.rx - grid.region.lx) / bw);
    int iy0 = static_cast<int>((fp.ly - grid.region.ly) / bh);
    int iy1 = static_cast<int>((fp.ry - grid.region.ly) / bh);
    ix0 = std::clamp(ix0, 0, grid.nx - 1);
    ix1 = std::clamp(ix1, 0, grid.nx - 1);
    iy0 = std::clamp(iy0, 0, grid.ny - 1);
    iy1 = std::clamp(iy1, 0, grid.ny - 1);
    for (int iy = iy0; iy <= iy1; ++iy) {
      for (int ix = ix0; ix <= ix1; ++ix) {
        grid.cell_area[grid.index(ix, iy)] +=
            overlap_area(fp, grid.bin_rect(ix, iy));
      }
    }
  }
  double total_overflow = 0.0;
  for (size_t b = 0; b < grid.capacity.size(); ++b) {
    grid.overflow[b] = std::max(0.0, grid.cell_area[b] - grid.capacity[b]);
    total_overflow += grid.overflow[b];
  }
  return movable_area > 0.0 ? total_overflow / movable_area : 0.0;
}

}  // namespace vbuf::place
