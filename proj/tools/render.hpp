#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nodal/gaussian_field.hpp"

namespace nodal::cli {

struct Polyline {
  std::vector<Vec2> points;
  bool closed = false;
};

// Zero set of g.f as polylines: marching squares with linear interpolation on
// cell edges, saddle cells split by the cell-mean rule.  On the torus, strands
// are cut where they cross the fundamental domain boundary.
std::vector<Polyline> nodal_polylines(const ScalarGrid& g);

struct PortraitStats {
  std::size_t closed_loops = 0;
  std::size_t open_strands = 0;
  double total_length = 0.0;
  // length-weighted mean over polylines of |w - h| / (w + h) for the
  // bounding box w x h: near 1 for long axis-parallel strands, near 0 for
  // round loops and diagonal strands
  double axis_alignment = 0.0;
};
PortraitStats portrait_stats(const std::vector<Polyline>& lines);

// Square SVG of side `size` pixels with the curves in black.
std::string render_svg(const std::vector<Polyline>& lines, const ScalarGrid& g, int size);

// Binary P6 raster: positive sign light gray, negative white, zero set black.
std::string render_ppm(const ScalarGrid& g, int size);

}  // namespace nodal::cli
