#include "render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "nodal/error.hpp"
#include "nodal/nodal_topology.hpp"

namespace nodal::cli {

namespace {

struct Segment {
  std::array<std::size_t, 2> edge;
  std::array<Vec2, 2> point;
};

class EdgeIndex {
 public:
  explicit EdgeIndex(const ScalarGrid& g)
      : nx_(g.nx), ny_(g.ny), cx_(g.periodic() ? g.nx : g.nx - 1), cy_(g.periodic() ? g.ny : g.ny - 1) {}
  std::size_t cells_x() const { return cx_; }
  std::size_t cells_y() const { return cy_; }
  std::size_t horizontal(std::size_t i, std::size_t j) const { return (j % ny_) * cx_ + i; }
  std::size_t vertical(std::size_t i, std::size_t j) const { return ny_ * cx_ + j * nx_ + (i % nx_); }
  std::size_t count() const { return ny_ * cx_ + cy_ * nx_; }

 private:
  std::size_t nx_, ny_, cx_, cy_;
};

Vec2 crossing(Vec2 p, Vec2 q, double a, double b) {
  const double t = std::clamp(a / (a - b), 0.0, 1.0);
  return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

std::vector<Segment> cell_segments(const ScalarGrid& g, const EdgeIndex& ix) {
  std::vector<Segment> segs;
  auto value = [&](std::size_t i, std::size_t j) { return g.f[(j % g.ny) * g.nx + (i % g.nx)]; };
  for (std::size_t j = 0; j < ix.cells_y(); ++j) {
    for (std::size_t i = 0; i < ix.cells_x(); ++i) {
      const double v00 = value(i, j), v10 = value(i + 1, j), v11 = value(i + 1, j + 1), v01 = value(i, j + 1);
      const Vec2 p00 = g.node(i, j), p10 = g.node(i + 1, j), p11 = g.node(i + 1, j + 1), p01 = g.node(i, j + 1);
      // edges: bottom, right, top, left
      const std::array<std::size_t, 4> id{ix.horizontal(i, j), ix.vertical(i + 1, j), ix.horizontal(i, j + 1),
                                          ix.vertical(i, j)};
      const std::array<bool, 4> cut{positive_sign(v00) != positive_sign(v10), positive_sign(v10) != positive_sign(v11),
                                    positive_sign(v01) != positive_sign(v11), positive_sign(v00) != positive_sign(v01)};
      const std::array<Vec2, 4> pt{crossing(p00, p10, v00, v10), crossing(p10, p11, v10, v11),
                                   crossing(p01, p11, v01, v11), crossing(p00, p01, v00, v01)};
      std::vector<int> on;
      for (int e = 0; e < 4; ++e) {
        if (cut[e]) on.push_back(e);
      }
      auto add = [&](int a, int b) { segs.push_back({{id[a], id[b]}, {pt[a], pt[b]}}); };
      if (on.size() == 2) {
        add(on[0], on[1]);
      } else if (on.size() == 4) {
        if (saddle_joins_main_diagonal(v00, v10, v11, v01)) {
          add(0, 1);  // cuts off corner 10
          add(2, 3);  // cuts off corner 01
        } else {
          add(3, 0);
          add(1, 2);
        }
      }
    }
  }
  return segs;
}

}  // namespace

std::vector<Polyline> nodal_polylines(const ScalarGrid& g) {
  if (g.nx < 2 || g.ny < 2) throw Error(ErrorCode::EmptyGrid, "grid too small to contour");
  const EdgeIndex ix(g);
  const std::vector<Segment> segs = cell_segments(g, ix);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::array<std::size_t, 2>> at(ix.count(), {kNone, kNone});
  for (std::size_t s = 0; s < segs.size(); ++s) {
    for (std::size_t e : segs[s].edge) {
      at[e][at[e][0] == kNone ? 0 : 1] = s;
    }
  }
  const double gap = 0.5 * g.h;
  std::vector<char> used(segs.size(), 0);
  std::vector<Polyline> out;

  auto walk = [&](std::size_t s, int from) {
    const std::size_t start_edge = segs[s].edge[from];
    Polyline cur;
    cur.points = {segs[s].point[from], segs[s].point[1 - from]};
    std::size_t e = segs[s].edge[1 - from];
    used[s] = 1;
    bool broken = false;
    for (;;) {
      const std::size_t t = at[e][0] == s ? at[e][1] : at[e][0];
      if (t == kNone || used[t]) break;
      const int k = segs[t].edge[0] == e ? 0 : 1;
      const Vec2 p = segs[t].point[k];
      if (std::hypot(p.x - cur.points.back().x, p.y - cur.points.back().y) > gap) {
        out.push_back(std::move(cur));
        cur = Polyline{};
        cur.points = {p};
        broken = true;
      }
      cur.points.push_back(segs[t].point[1 - k]);
      e = segs[t].edge[1 - k];
      used[t] = 1;
      s = t;
    }
    if (!broken && e == start_edge && cur.points.size() > 2) {
      cur.points.pop_back();
      cur.closed = true;
    }
    out.push_back(std::move(cur));
  };

  // open strands first, from their free ends
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    for (int k = 0; k < 2; ++k) {
      const auto& a = at[segs[s].edge[k]];
      if (!used[s] && (a[0] == kNone || a[1] == kNone)) walk(s, k);
    }
  }
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (!used[s]) walk(s, 0);
  }
  return out;
}

PortraitStats portrait_stats(const std::vector<Polyline>& lines) {
  PortraitStats st;
  double weighted = 0.0;
  for (const Polyline& l : lines) {
    (l.closed ? st.closed_loops : st.open_strands)++;
    const std::size_t n = l.points.size();
    const std::size_t steps = l.closed ? n : n - 1;
    double len = 0.0;
    Vec2 lo = l.points[0], hi = l.points[0];
    for (std::size_t i = 0; i < steps; ++i) {
      const Vec2 a = l.points[i], b = l.points[(i + 1) % n];
      len += std::hypot(b.x - a.x, b.y - a.y);
      lo = {std::min(lo.x, b.x), std::min(lo.y, b.y)};
      hi = {std::max(hi.x, b.x), std::max(hi.y, b.y)};
    }
    const double w = hi.x - lo.x, hgt = hi.y - lo.y;
    st.total_length += len;
    if (w + hgt > 0.0) weighted += len * std::abs(w - hgt) / (w + hgt);
  }
  st.axis_alignment = st.total_length > 0.0 ? weighted / st.total_length : 0.0;
  return st;
}

namespace {

struct Frame {
  double x0, y0, w, hgt;
};

Frame frame_of(const ScalarGrid& g) {
  const double cx = static_cast<double>(g.periodic() ? g.nx : g.nx - 1);
  const double cy = static_cast<double>(g.periodic() ? g.ny : g.ny - 1);
  return {g.origin.x, g.origin.y, cx * g.h, cy * g.h};
}

}  // namespace

std::string render_svg(const std::vector<Polyline>& lines, const ScalarGrid& g, int size) {
  if (size < 1) throw Error(ErrorCode::InvalidParameter, "image size must be positive");
  const Frame fr = frame_of(g);
  const double sx = size / fr.w, sy = size / fr.hgt;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
      << size << ' ' << size << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<g fill=\"none\" stroke=\"black\" stroke-width=\"1\">\n";
  char buf[64];
  for (const Polyline& l : lines) {
    out << "<path d=\"";
    for (std::size_t i = 0; i < l.points.size(); ++i) {
      const double X = (l.points[i].x - fr.x0) * sx, Y = size - (l.points[i].y - fr.y0) * sy;
      std::snprintf(buf, sizeof buf, "%c%.3f %.3f", i ? 'L' : 'M', X, Y);
      out << (i ? " " : "") << buf;
    }
    out << (l.closed ? " Z" : "") << "\"/>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

std::string render_ppm(const ScalarGrid& g, int size) {
  if (size < 2) throw Error(ErrorCode::InvalidParameter, "image size must be at least 2");
  const Frame fr = frame_of(g);
  const std::size_t n = static_cast<std::size_t>(size);
  auto value = [&](double x, double y) {
    const double u = std::clamp((x - fr.x0) / g.h, 0.0, static_cast<double>(g.periodic() ? g.nx : g.nx - 1));
    const double v = std::clamp((y - fr.y0) / g.h, 0.0, static_cast<double>(g.periodic() ? g.ny : g.ny - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(u), g.periodic() ? g.nx - 1 : g.nx - 2);
    const std::size_t j = std::min(static_cast<std::size_t>(v), g.periodic() ? g.ny - 1 : g.ny - 2);
    const double a = u - static_cast<double>(i), b = v - static_cast<double>(j);
    auto at = [&](std::size_t p, std::size_t q) { return g.f[(q % g.ny) * g.nx + (p % g.nx)]; };
    return (1 - a) * (1 - b) * at(i, j) + a * (1 - b) * at(i + 1, j) + (1 - a) * b * at(i, j + 1) +
           a * b * at(i + 1, j + 1);
  };
  std::vector<char> pos(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    const double y = fr.y0 + fr.hgt * (1.0 - (static_cast<double>(r) + 0.5) / size);
    for (std::size_t c = 0; c < n; ++c) {
      const double x = fr.x0 + fr.w * (static_cast<double>(c) + 0.5) / size;
      pos[r * n + c] = positive_sign(value(x, y));
    }
  }
  std::string out = "P6\n" + std::to_string(size) + " " + std::to_string(size) + "\n255\n";
  out.reserve(out.size() + 3 * n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const bool p = pos[r * n + c];
      const bool edge = (c + 1 < n && pos[r * n + c + 1] != p) || (r + 1 < n && pos[(r + 1) * n + c] != p);
      const unsigned char shade = edge ? 0 : (p ? 200 : 255);
      out.append(3, static_cast<char>(shade));
    }
  }
  return out;
}

}  // namespace nodal::cli
