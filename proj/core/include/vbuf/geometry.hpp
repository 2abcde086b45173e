#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace vbuf {

struct Pt {
  double x = 0.0;
  double y = 0.0;
};

inline double manhattan(const Pt& a, const Pt& b)
{
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

struct Rect {
  double lx = 0.0;
  double ly = 0.0;
  double rx = 0.0;
  double ry = 0.0;

  double width() const { return rx - lx; }
  double height() const { return ry - ly; }
  double area() const { return width() * height(); }
  Pt center() const { return {0.5 * (lx + rx), 0.5 * (ly + ry)}; }

  void expand(const Pt& p)
  {
    lx = std::min(lx, p.x);
    ly = std::min(ly, p.y);
    rx = std::max(rx, p.x);
    ry = std::max(ry, p.y);
  }

  static Rect around(const Pt& p) { return {p.x, p.y, p.x, p.y}; }

  // Half-perimeter of the union with a point, without mutating.
  double hpwl_with(const Pt& p) const
  {
    const double w = std::max(rx, p.x) - std::min(lx, p.x);
    const double h = std::max(ry, p.y) - std::min(ly, p.y);
    return w + h;
  }

  double hpwl() const { return width() + height(); }

  bool contains(const Rect& other) const
  {
    return lx <= other.lx && ly <= other.ly && rx >= other.rx && ry >= other.ry;
  }
};

// Half-perimeter wirelength of a point set: (max x - min x) + (max y - min y).
inline double hpwl(std::span<const Pt> points)
{
  if (points.empty()) {
    throw std::invalid_argument("hpwl: empty point set");
  }
  Rect bb = Rect::around(points[0]);
  for (const Pt& p : points.subspan(1)) {
    bb.expand(p);
  }
  return bb.hpwl();
}

inline double hpwl(const std::vector<Pt>& points)
{
  return hpwl(std::span<const Pt>(points));
}

}  // namespace vbuf
