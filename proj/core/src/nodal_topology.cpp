#include "nodal/nodal_topology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "nodal/error.hpp"
#include "nodal/parallel.hpp"

namespace nodal {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0u); }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

struct Offset {
  int x = 0;
  int y = 0;
  Offset operator+(Offset o) const { return {x + o.x, y + o.y}; }
  Offset operator-(Offset o) const { return {x - o.x, y - o.y}; }
  bool operator==(const Offset&) const = default;
};

// Union-find over lifts to the universal cover: diff_[e] is the lattice
// translation from parent_[e] to e.  Closing a cycle with a nonzero net
// translation marks the class as wrapping.
class OffsetUnionFind {
 public:
  explicit OffsetUnionFind(std::size_t n) : parent_(n), diff_(n), wraps_(n, false) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }

  std::pair<std::uint32_t, Offset> find(std::uint32_t x) {
    path_.clear();
    while (parent_[x] != x) {
      path_.push_back(x);
      x = parent_[x];
    }
    const std::uint32_t root = x;
    // Compress from the node nearest the root outwards.
    for (auto it = path_.rbegin(); it != path_.rend(); ++it) {
      const std::uint32_t p = parent_[*it];
      if (p != root) diff_[*it] = diff_[*it] + diff_[p];
      parent_[*it] = root;
    }
    return {root, path_.empty() ? Offset{} : diff_[path_.front()]};
  }

  // Records lift(b) - lift(a) = d.
  void unite(std::uint32_t a, std::uint32_t b, Offset d) {
    const auto [ra, pa] = find(a);
    const auto [rb, pb] = find(b);
    if (ra == rb) {
      if (!(pb - pa == d)) wraps_[ra] = true;
      return;
    }
    parent_[rb] = ra;
    diff_[rb] = d + pa - pb;
    wraps_[ra] = wraps_[ra] || wraps_[rb];
  }

  bool wraps(std::uint32_t root) const { return wraps_[root]; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<Offset> diff_;
  std::vector<bool> wraps_;
  std::vector<std::uint32_t> path_;
};

void require_nonempty(const ScalarGrid& g) {
  if (g.nx == 0 || g.ny == 0 || g.f.size() != g.nx * g.ny) throw Error(ErrorCode::EmptyGrid, "grid has no nodes");
}

struct CurveCount {
  std::size_t closed = 0;
  std::size_t touching_boundary = 0;
  std::size_t wrapping = 0;
};

// Zero-set components as classes of sign-changing grid edges joined through
// cells; saddle cells are split by the cell-mean rule.
CurveCount trace_zero_curves(const ScalarGrid& g) {
  const std::size_t nx = g.nx, ny = g.ny;
  const bool periodic = g.periodic();
  const std::size_t hcount = nx * ny;
  auto hidx = [&](std::size_t i, std::size_t j) { return static_cast<std::uint32_t>(j * nx + i); };
  auto vidx = [&](std::size_t i, std::size_t j) { return static_cast<std::uint32_t>(hcount + j * nx + i); };
  auto sign = [&](std::size_t i, std::size_t j) { return positive_sign(g.f[j * nx + i]); };

  OffsetUnionFind uf(2 * hcount);
  std::vector<bool> crossing(2 * hcount, false);
  const std::size_t ci = periodic ? nx : nx - 1;
  const std::size_t cj = periodic ? ny : ny - 1;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      if (i < ci) crossing[hidx(i, j)] = sign(i, j) != sign((i + 1) % nx, j);
      if (j < cj) crossing[vidx(i, j)] = sign(i, j) != sign(i, (j + 1) % ny);
    }
  }

  for (std::size_t j = 0; j < cj; ++j) {
    const std::size_t j1 = (j + 1) % ny;
    for (std::size_t i = 0; i < ci; ++i) {
      const std::size_t i1 = (i + 1) % nx;
      struct Side {
        std::uint32_t edge;
        Offset off;
      };
      // bottom, right, top, left
      const std::array<Side, 4> sides{{{hidx(i, j), {}},
                                       {vidx(i1, j), {i == nx - 1 ? 1 : 0, 0}},
                                       {hidx(i, j1), {0, j == ny - 1 ? 1 : 0}},
                                       {vidx(i, j), {}}}};
      std::array<int, 4> hit{};
      int n = 0;
      for (int k = 0; k < 4; ++k) {
        if (crossing[sides[k].edge]) hit[n++] = k;
      }
      auto join = [&](int a, int b) { uf.unite(sides[a].edge, sides[b].edge, sides[b].off - sides[a].off); };
      if (n == 2) {
        join(hit[0], hit[1]);
      } else if (n == 4) {
        const double v00 = g.f[j * nx + i], v10 = g.f[j * nx + i1];
        const double v11 = g.f[j1 * nx + i1], v01 = g.f[j1 * nx + i];
        if (saddle_joins_main_diagonal(v00, v10, v11, v01)) {
          join(0, 1);  // cut off the (i+1, j) corner
          join(3, 2);  // cut off the (i, j+1) corner
        } else {
          join(0, 3);
          join(1, 2);
        }
      }
    }
  }

  std::vector<std::uint8_t> seen(2 * hcount, 0);  // bit 1: present, bit 2: touches boundary
  for (std::size_t e = 0; e < 2 * hcount; ++e) {
    if (!crossing[e]) continue;
    const std::uint32_t root = uf.find(static_cast<std::uint32_t>(e)).first;
    seen[root] |= 1;
    if (!periodic) {
      const bool horizontal = e < hcount;
      const std::size_t k = horizontal ? e : e - hcount;
      const std::size_t i = k % nx, j = k / nx;
      const bool on_edge = horizontal ? (j == 0 || j == ny - 1) : (i == 0 || i == nx - 1);
      if (on_edge) seen[root] |= 2;
    }
  }
  CurveCount out;
  for (std::size_t r = 0; r < 2 * hcount; ++r) {
    if (!(seen[r] & 1)) continue;
    if (periodic) {
      if (uf.wraps(static_cast<std::uint32_t>(r))) {
        ++out.wrapping;
      } else {
        ++out.closed;
      }
    } else if (seen[r] & 2) {
      ++out.touching_boundary;
    } else {
      ++out.closed;
    }
  }
  return out;
}

}  // namespace

bool saddle_joins_main_diagonal(double v00, double v10, double v11, double v01) {
  const double center = 0.25 * (v00 + v10 + v11 + v01);
  return positive_sign(center) == positive_sign(v00);
}

std::size_t NodalCensus::small_domains(double delta) const {
  return static_cast<std::size_t>(std::lower_bound(interior_domain_areas.begin(), interior_domain_areas.end(), delta) -
                                  interior_domain_areas.begin());
}

DomainLabels label_sign_domains(const ScalarGrid& g) {
  require_nonempty(g);
  const std::size_t nx = g.nx, ny = g.ny;
  UnionFind uf(nx * ny);
  auto id = [&](std::size_t i, std::size_t j) { return static_cast<std::uint32_t>(j * nx + i); };
  auto sign = [&](std::size_t i, std::size_t j) { return positive_sign(g.f[j * nx + i]); };
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      if (i + 1 < nx && sign(i, j) == sign(i + 1, j)) uf.unite(id(i, j), id(i + 1, j));
      if (j + 1 < ny && sign(i, j) == sign(i, j + 1)) uf.unite(id(i, j), id(i, j + 1));
      if (i + 1 < nx && j + 1 < ny) {
        const bool s00 = sign(i, j), s10 = sign(i + 1, j), s11 = sign(i + 1, j + 1), s01 = sign(i, j + 1);
        if (s00 == s11 && s10 == s01 && s00 != s10) {
          if (saddle_joins_main_diagonal(g.at(i, j), g.at(i + 1, j), g.at(i + 1, j + 1), g.at(i, j + 1))) {
            uf.unite(id(i, j), id(i + 1, j + 1));
          } else {
            uf.unite(id(i + 1, j), id(i, j + 1));
          }
        }
      }
    }
  }
  DomainLabels out;
  out.label.resize(nx * ny);
  std::vector<std::uint32_t> compact(nx * ny, UINT32_MAX);
  for (std::size_t k = 0; k < nx * ny; ++k) {
    const std::uint32_t root = uf.find(static_cast<std::uint32_t>(k));
    if (compact[root] == UINT32_MAX) compact[root] = static_cast<std::uint32_t>(out.count++);
    out.label[k] = compact[root];
  }
  return out;
}

NodalCensus count_components_plane(const ScalarGrid& g) {
  require_nonempty(g);
  if (g.periodic()) throw Error(ErrorCode::DomainMismatch, "plane census needs a square grid");
  const DomainLabels labels = label_sign_domains(g);
  std::vector<std::size_t> nodes(labels.count, 0);
  std::vector<bool> touches(labels.count, false);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::uint32_t l = labels.label[j * g.nx + i];
      ++nodes[l];
      if (i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1) touches[l] = true;
    }
  }
  NodalCensus c;
  c.domain = g.domain;
  c.h = g.h;
  c.seed = g.seed;
  c.total_domains = labels.count;
  for (std::size_t l = 0; l < labels.count; ++l) {
    if (touches[l]) {
      ++c.boundary_domains;
    } else {
      c.interior_domain_areas.push_back(static_cast<double>(nodes[l]) * g.h * g.h);
    }
  }
  std::sort(c.interior_domain_areas.begin(), c.interior_domain_areas.end());
  c.interior_components = c.interior_domain_areas.size();
  const CurveCount curves = trace_zero_curves(g);
  c.closed_curves = curves.closed;
  c.boundary_components = curves.touching_boundary;
  return c;
}

NodalCensus count_components_torus(const ScalarGrid& g) {
  require_nonempty(g);
  if (!g.periodic()) throw Error(ErrorCode::DomainMismatch, "torus census needs a periodic grid");
  const CurveCount curves = trace_zero_curves(g);
  NodalCensus c;
  c.domain = g.domain;
  c.h = g.h;
  c.seed = g.seed;
  c.interior_components = curves.closed;
  c.closed_curves = curves.closed;
  c.wrapping_components = curves.wrapping;
  return c;
}

std::size_t count_small_domains(const ScalarGrid& g, double delta) {
  return count_components_plane(g).small_domains(delta);
}

std::vector<Vec2> find_flips(const FieldSample& s, const Domain& domain, double h, Vec2 u) {
  if (domain.is_torus()) throw Error(ErrorCode::DomainMismatch, "flip counting works on squares");
  const double un = norm(u);
  if (!(un > 0.0)) throw Error(ErrorCode::InvalidParameter, "flip direction must be nonzero");
  u = u * (1.0 / un);
  // Candidate cells get scarcer as h shrinks; 32 nodes per shortest
  // wavelength is the cheapest overall.
  const double kmax_all = s.max_wavenumber();
  if (kmax_all > 0.0) h = std::min(h, kTwoPi / kmax_all / 32.0);
  const ScalarGrid g = evaluate_grid(s, domain, h, 2);
  const std::size_t nx = g.nx, ny = g.ny;
  if (nx < 2 || ny < 2) return {};

  // Bilinear interpolation error bounds for f and for g = <grad f, u>,
  // from the absolute sums of second derivatives of each plane wave.
  double bound_f = 0.0, bound_g = 0.0, kmax = 0.0;
  for (const Wave& w : s.waves()) {
    const double amp = std::hypot(w.c, w.s);
    const double k2 = dot(w.k, w.k);
    bound_f += amp * k2;
    bound_g += amp * std::abs(dot(w.k, u)) * k2;
    kmax = std::max(kmax, std::sqrt(k2));
  }
  const double margin_f = 1.5 * g.h * g.h / 8.0 * bound_f;
  const double margin_g = 1.5 * g.h * g.h / 8.0 * bound_g;
  auto gval = [&](std::size_t k) { return g.fx[k] * u.x + g.fy[k] * u.y; };
  const double ftol = 1e-12 * std::max(1.0, std::abs(s.constant()) + bound_f / std::max(1.0, kmax * kmax));
  const double reach = 3.0 * g.h;

  std::vector<std::vector<Vec2>> rows(ny - 1);
  parallel_for(ny - 1, [&](std::size_t j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const std::array<std::size_t, 4> corners{j * nx + i, j * nx + i + 1, (j + 1) * nx + i + 1, (j + 1) * nx + i};
      double fmin = g.f[corners[0]], fmax = fmin, gmin = gval(corners[0]), gmax = gmin;
      for (std::size_t k : corners) {
        fmin = std::min(fmin, g.f[k]);
        fmax = std::max(fmax, g.f[k]);
        gmin = std::min(gmin, gval(k));
        gmax = std::max(gmax, gval(k));
      }
      if (fmin - margin_f > 0.0 || fmax + margin_f < 0.0) continue;
      if (gmin - margin_g > 0.0 || gmax + margin_g < 0.0) continue;

      const Vec2 start = g.node(i, j) + Vec2{0.5 * g.h, 0.5 * g.h};
      Vec2 p = start;
      for (int it = 0; it < 100; ++it) {
        const Jet jet = evaluate(s, p, 2);
        const double f = jet.f;
        const double gv = dot(jet.grad, u);
        const Vec2 hu{jet.hess.xx * u.x + jet.hess.xy * u.y, jet.hess.xy * u.x + jet.hess.yy * u.y};
        const double scale_g = std::max(1.0, norm(hu) * g.h);
        if (std::abs(f) <= ftol && std::abs(gv) <= 1e-10 * scale_g) {
          rows[j].push_back(p);
          break;
        }
        const double det = jet.grad.x * hu.y - jet.grad.y * hu.x;
        if (det == 0.0 || !std::isfinite(det)) break;
        Vec2 step{-(hu.y * f - jet.grad.y * gv) / det, -(-hu.x * f + jet.grad.x * gv) / det};
        const double len = norm(step);
        if (len > g.h) step = step * (g.h / len);
        p = p + step;
        if (norm(p - start) > reach) break;
        if (len < 1e-15 * (1.0 + norm(p))) {
          if (std::abs(f) <= 1e-9 && std::abs(gv) <= 1e-7 * scale_g) rows[j].push_back(p);
          break;
        }
      }
    }
  });

  std::vector<Vec2> all;
  for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  std::sort(all.begin(), all.end(), [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  // Degenerate roots (f = grad f = 0) converge only to about sqrt(eps) along
  // the tangent; merge at a small fraction of the spacing.
  const double merge_tol = std::max(1e-6, 1e-3 * g.h);
  std::vector<Vec2> roots;
  for (Vec2 p : all) {
    bool dup = false;
    for (auto it = roots.rbegin(); it != roots.rend() && it->x >= p.x - merge_tol; ++it) {
      if (std::abs(it->y - p.y) <= merge_tol) {
        dup = true;
        break;
      }
    }
    if (!dup && domain.contains(p, 1e-9 * std::max(1.0, domain.half_side))) roots.push_back(p);
  }
  return roots;
}

std::size_t count_flips(const FieldSample& s, const Domain& domain, double h, int axis) {
  if (axis != 1 && axis != 2) throw Error(ErrorCode::InvalidParameter, "axis must be 1 or 2");
  return find_flips(s, domain, h, axis == 1 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0}).size();
}

std::vector<Vec2> find_curve_intersections(const FieldSample& s, Vec2 a, Vec2 b, double h) {
  const double length = norm(b - a);
  if (!(length > 0.0)) throw Error(ErrorCode::InvalidParameter, "segment must have positive length");
  if (h <= 0.0) h = default_spacing(s) / 4.0;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(length / h)));
  auto point = [&](double t) { return a + (b - a) * t; };
  auto sign_of = [](double v) { return std::abs(v) < kTieEpsilon ? 0 : (v > 0.0 ? 1 : -1); };

  std::vector<Vec2> roots;
  double prev_t = 0.0;
  double prev_v = evaluate_value(s, a);
  int prev_sign = sign_of(prev_v);
  if (prev_sign == 0) roots.push_back(a);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(steps);
    const double v = evaluate_value(s, point(t));
    const int sg = sign_of(v);
    if (sg == 0) {
      if (prev_sign != 0) roots.push_back(point(t));
    } else if (prev_sign != 0 && sg != prev_sign) {
      double lo = prev_t, hi = t, vlo = prev_v;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double vm = evaluate_value(s, point(mid));
        if ((vm > 0.0) == (vlo > 0.0)) {
          lo = mid;
          vlo = vm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(point(0.5 * (lo + hi)));
    }
    prev_t = t;
    prev_v = v;
    prev_sign = sg;
  }
  return roots;
}

std::size_t count_curve_intersections(const FieldSample& s, Vec2 a, Vec2 b, double h) {
  return find_curve_intersections(s, a, b, h).size();
}

std::string census_to_json(const NodalCensus& c) {
  nlohmann::ordered_json j;
  j["domain"] = c.domain.is_torus() ? "torus" : "square";
  if (!c.domain.is_torus()) {
    j["R"] = c.domain.half_side;
    j["center"] = {c.domain.center.x, c.domain.center.y};
  }
  j["h"] = c.h;
  j["seed"] = c.seed;
  j["interior_components"] = c.interior_components;
  j["boundary_components"] = c.boundary_components;
  j["wrapping_components"] = c.wrapping_components;
  j["closed_curves"] = c.closed_curves;
  j["total_domains"] = c.total_domains;
  j["boundary_domains"] = c.boundary_domains;
  j["s1_flips"] = c.s1_flips ? nlohmann::ordered_json(*c.s1_flips) : nlohmann::ordered_json(nullptr);
  j["s2_flips"] = c.s2_flips ? nlohmann::ordered_json(*c.s2_flips) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

}  // namespace nodal
