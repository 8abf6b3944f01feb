#include "nodal/stability.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "nodal/error.hpp"
#include "nodal/nodal_topology.hpp"
#include "nodal/parallel.hpp"

namespace nodal {

namespace {

double node_min_max(const ScalarGrid& g, std::size_t k) {
  return std::max(std::abs(g.f[k]), std::hypot(g.fx[k], g.fy[k]));
}

double point_min_max(const FieldSample& s, Vec2 p) {
  const Jet j = evaluate(s, p, 1);
  return std::max(std::abs(j.f), norm(j.grad));
}

// Newton iteration for grad f = 0 from `start`; false if it leaves the
// neighbourhood or stalls.
bool polish_critical_point(const FieldSample& s, Vec2 start, double h, double tol, Vec2& out) {
  Vec2 p = start;
  for (int it = 0; it < 40; ++it) {
    const Jet j = evaluate(s, p, 2);
    if (norm(j.grad) <= tol) {
      out = p;
      return true;
    }
    const double det = j.hess.xx * j.hess.yy - j.hess.xy * j.hess.xy;
    if (det == 0.0 || !std::isfinite(det)) return false;
    Vec2 step{-(j.hess.yy * j.grad.x - j.hess.xy * j.grad.y) / det, -(-j.hess.xy * j.grad.x + j.hess.xx * j.grad.y) / det};
    const double len = norm(step);
    if (len > h) step = step * (h / len);
    p = p + step;
    if (norm(p - start) > 3.0 * h) return false;
  }
  return false;
}

struct Unit {
  Vec2 xi;
  double mass = 0.0;
  double theta = 0.0;  // direction modulo pi
  bool origin = false;
};

std::vector<Unit> transport_units(const SpectralMeasure& rho) {
  const PairSplit split = split_pairs(rho);
  const auto& atoms = rho.atoms();
  std::vector<Unit> reps;
  for (std::size_t i : split.representatives) {
    Unit u{atoms[i].xi, atoms[i].weight + atoms[rho.antipode()[i]].weight};
    u.theta = std::atan2(u.xi.y, u.xi.x);
    if (u.theta < 0.0) u.theta += kPi;
    if (u.theta >= kPi) u.theta -= kPi;
    reps.push_back(u);
  }
  std::stable_sort(reps.begin(), reps.end(), [](const Unit& a, const Unit& b) { return a.theta < b.theta; });
  std::vector<Unit> units;
  if (split.origin) units.push_back({{0.0, 0.0}, atoms[*split.origin].weight, 0.0, true});
  units.insert(units.end(), reps.begin(), reps.end());
  return units;
}

struct Segment {
  std::size_t i = 0;
  std::size_t j = 0;
  double mass = 0.0;
};

double unit_cost(const Unit& a, const Unit& b) {
  if (a.origin || b.origin) return (a.origin && b.origin) ? 0.0 : 1.0;
  const double d = std::abs(a.theta - b.theta);
  return std::min(d, kPi - d);
}

// North-west corner plan between two ordered mass lists.
std::vector<Segment> north_west(const std::vector<Unit>& a, const std::vector<Unit>& b) {
  std::vector<Segment> plan;
  std::size_t i = 0, j = 0;
  double ra = a.empty() ? 0.0 : a[0].mass, rb = b.empty() ? 0.0 : b[0].mass;
  while (i < a.size() && j < b.size()) {
    const double m = std::min(ra, rb);
    if (m > 1e-15) plan.push_back({i, j, m});
    ra -= m;
    rb -= m;
    if (ra <= 1e-15 && ++i < a.size()) ra = a[i].mass;
    if (rb <= 1e-15 && ++j < b.size()) rb = b[j].mass;
  }
  return plan;
}

}  // namespace

StabilityProfile stability_profile(const FieldSample& s, const Domain& domain, double h) {
  if (domain.is_torus()) throw Error(ErrorCode::DomainMismatch, "stability profiles work on squares");
  const ScalarGrid g = evaluate_grid(s, domain, h, 2);
  if (g.f.empty()) throw Error(ErrorCode::EmptyGrid, "empty grid");
  const std::size_t nx = g.nx, ny = g.ny;
  StabilityProfile p;
  p.domain = domain;
  p.h = g.h;
  p.min_max = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.f.size(); ++k) {
    const double m = node_min_max(g, k);
    if (m < p.min_max) {
      p.min_max = m;
      p.argmin = g.node(k % nx, k / nx);
    }
    p.c2_norm = std::max({p.c2_norm, std::abs(g.f[k]), std::abs(g.fx[k]), std::abs(g.fy[k]), std::abs(g.fxx[k]),
                          std::abs(g.fxy[k]), std::abs(g.fyy[k])});
  }
  p.refined_min_max = p.min_max;
  const double tol_in = 1e-9 * std::max(1.0, domain.half_side);
  auto consider = [&](Vec2 x, double m) {
    if (m < p.refined_min_max && domain.contains(x, tol_in)) {
      p.refined_min_max = m;
      p.argmin = x;
    }
  };

  // Critical points: Newton from cells where both partials change sign and
  // from nodes where |grad f| is a local minimum.
  auto grad2 = [&](std::size_t i, std::size_t j) {
    const std::size_t k = j * nx + i;
    return g.fx[k] * g.fx[k] + g.fy[k] * g.fy[k];
  };
  std::vector<Vec2> starts;
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const std::size_t c[4] = {j * nx + i, j * nx + i + 1, (j + 1) * nx + i, (j + 1) * nx + i + 1};
      bool xpos = false, xneg = false, ypos = false, yneg = false;
      for (std::size_t k : c) {
        (g.fx[k] >= 0.0 ? xpos : xneg) = true;
        (g.fy[k] >= 0.0 ? ypos : yneg) = true;
      }
      if (xpos && xneg && ypos && yneg) starts.push_back(g.node(i, j) + Vec2{0.5 * g.h, 0.5 * g.h});
    }
  }
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double v = grad2(i, j);
      bool local_min = true;
      for (int dj = -1; dj <= 1 && local_min; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const long a = long(i) + di, b = long(j) + dj;
          if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= long(nx) || b >= long(ny)) continue;
          if (grad2(a, b) < v) {
            local_min = false;
            break;
          }
        }
      }
      if (local_min) starts.push_back(g.node(i, j));
    }
  }
  const double tol = 1e-10 * std::max(1.0, s.max_wavenumber());
  std::vector<Vec2> found(starts.size());
  std::vector<char> ok(starts.size(), 0);
  parallel_for(starts.size(), [&](std::size_t k) { ok[k] = polish_critical_point(s, starts[k], g.h, tol, found[k]); });
  std::vector<Vec2> crit;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    if (ok[k] && domain.contains(found[k], tol_in)) crit.push_back(found[k]);
  }
  std::sort(crit.begin(), crit.end(), [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  const double merge_tol = std::max(1e-6, 1e-3 * g.h);
  std::vector<Vec2> distinct;
  for (Vec2 c : crit) {
    bool dup = false;
    for (auto it = distinct.rbegin(); it != distinct.rend() && it->x >= c.x - merge_tol; ++it) {
      if (std::abs(it->y - c.y) <= merge_tol) {
        dup = true;
        break;
      }
    }
    if (!dup) distinct.push_back(c);
  }
  p.critical_points = distinct.size();
  for (Vec2 c : distinct) consider(c, point_min_max(s, c));

  // Local zoom around the smallest grid minima of max(|f|, |grad f|).
  std::vector<std::pair<double, std::size_t>> minima;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double v = node_min_max(g, j * nx + i);
      bool local_min = true;
      for (int dj = -1; dj <= 1 && local_min; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const long a = long(i) + di, b = long(j) + dj;
          if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= long(nx) || b >= long(ny)) continue;
          if (node_min_max(g, std::size_t(b) * nx + std::size_t(a)) < v) {
            local_min = false;
            break;
          }
        }
      }
      if (local_min) minima.push_back({v, j * nx + i});
    }
  }
  std::sort(minima.begin(), minima.end());
  minima.resize(std::min<std::size_t>(minima.size(), 16));
  for (const auto& [v, k] : minima) {
    Vec2 c = g.node(k % nx, k / nx);
    double best = v, span = g.h;
    for (int round = 0; round < 4; ++round) {
      const Vec2 center = c;
      for (int b = -4; b <= 4; ++b) {
        for (int a = -4; a <= 4; ++a) {
          const Vec2 x = center + Vec2{a * span / 4.0, b * span / 4.0};
          if (!domain.contains(x, tol_in)) continue;
          const double m = point_min_max(s, x);
          if (m < best) {
            best = m;
            c = x;
          }
        }
      }
      span /= 4.0;
    }
    consider(c, best);
  }
  return p;
}

double c1_distance(const ScalarGrid& g1, const ScalarGrid& g2) {
  if (g1.nx != g2.nx || g1.ny != g2.ny || g1.h != g2.h || g1.origin != g2.origin ||
      g1.domain.is_torus() != g2.domain.is_torus()) {
    throw Error(ErrorCode::DomainMismatch, "grids do not share a lattice");
  }
  if (g1.order < 1 || g2.order < 1) throw Error(ErrorCode::InvalidParameter, "c1_distance needs first derivatives");
  double d = 0.0;
  for (std::size_t k = 0; k < g1.f.size(); ++k) {
    d = std::max({d, std::abs(g1.f[k] - g2.f[k]), std::abs(g1.fx[k] - g2.fx[k]), std::abs(g1.fy[k] - g2.fy[k])});
  }
  return d;
}

double c1_distance(const FieldSample& s1, const FieldSample& s2, const Domain& domain, double h) {
  return c1_distance(evaluate_grid(s1, domain, h, 1), evaluate_grid(s2, domain, h, 1));
}

std::pair<FieldSample, FieldSample> coupled_sample(const SpectralMeasure& rho0, const SpectralMeasure& rhoj,
                                                   StreamId stream) {
  const std::vector<Unit> a = transport_units(rho0);
  const std::vector<Unit> b0 = transport_units(rhoj);
  const std::size_t head_b = (!b0.empty() && b0[0].origin) ? 1 : 0;
  const std::size_t reps_b = b0.size() - head_b;

  // Try every cyclic start of rho_j's directions and keep the cheapest plan.
  std::vector<Unit> best_b;
  std::vector<Segment> best_plan;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < std::max<std::size_t>(reps_b, 1); ++t) {
    std::vector<Unit> b(b0.begin(), b0.begin() + static_cast<long>(head_b));
    for (std::size_t r = 0; r < reps_b; ++r) b.push_back(b0[head_b + (t + r) % reps_b]);
    const auto plan = north_west(a, b);
    double cost = 0.0;
    for (const Segment& sg : plan) cost += sg.mass * unit_cost(a[sg.i], b[sg.j]);
    if (cost < best_cost - 1e-15) {
      best_cost = cost;
      best_plan = plan;
      best_b = std::move(b);
    }
  }

  std::vector<Wave> w0, wj;
  double c0 = 0.0, cj = 0.0;
  for (std::size_t k = 0; k < best_plan.size(); ++k) {
    const Segment& sg = best_plan[k];
    const auto [x, y] = normal_pair(stream, k);
    const double amp = std::sqrt(sg.mass);
    const Unit& ua = a[sg.i];
    const Unit& ub = best_b[sg.j];
    if (ua.origin) {
      c0 += amp * x;
    } else {
      w0.push_back({rho0.kappa() * ua.xi, amp * x, amp * y});
    }
    if (ub.origin) {
      cj += amp * x;
    } else {
      const double sign = (!ua.origin && dot(ua.xi, ub.xi) < 0.0) ? -1.0 : 1.0;
      wj.push_back({rhoj.kappa() * sign * ub.xi, amp * x, amp * y});
    }
  }
  return {FieldSample::from_waves(std::move(w0), c0, rho0.kappa()),
          FieldSample::from_waves(std::move(wj), cj, rhoj.kappa())};
}

SandwichReport sandwich_check(const SpectralMeasure& rho0, const SpectralMeasure& rhoj, double R, std::size_t M,
                              double beta, std::uint64_t seed, double h) {
  if (!(R > 1.0)) throw Error(ErrorCode::InvalidParameter, "sandwich needs R > 1");
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidParameter, "beta must be positive");
  SandwichReport rep;
  rep.R = R;
  rep.beta = beta;
  rep.draws = M;
  if (h <= 0.0) {
    const auto [f0, fj] = coupled_sample(rho0, rhoj, StreamId{seed, 0});
    h = std::min(default_spacing(f0), default_spacing(fj));
    // keep R - 1, R and R + 1 on the lattice
    h = 1.0 / std::ceil(1.0 / h - 1e-9);
  }
  rep.h = h;
  const bool filter_on = std::isfinite(beta);
  struct Draw {
    bool stable = false, close = false, violation = false;
  };
  std::vector<Draw> draws(M);
  for (std::size_t k = 0; k < M; ++k) {
    const auto [f0, fj] = coupled_sample(rho0, rhoj, StreamId{seed, k});
    const Domain outer = Domain::square(R + 1.0);
    const ScalarGrid g0 = evaluate_grid(f0, outer, h, 1);
    const ScalarGrid gj = evaluate_grid(fj, outer, h, 1);
    Draw& d = draws[k];
    if (filter_on) {
      d.stable = is_stable(stability_profile(f0, outer, h), 2.0 * beta);
      d.close = c1_distance(g0, gj) < beta;
    } else {
      d.stable = d.close = true;
    }
    const std::size_t n0 = count_components_plane(g0.crop(R)).interior_components;
    const std::size_t inner = count_components_plane(gj.crop(R - 1.0)).interior_components;
    const std::size_t outer_count = count_components_plane(gj).interior_components;
    d.violation = !(inner <= n0 && n0 <= outer_count);
  }
  for (const Draw& d : draws) {
    rep.passed_stability += d.stable;
    rep.passed_closeness += d.close;
    if (d.violation) ++rep.violations_unfiltered;
    if (d.stable && d.close) {
      ++rep.filtered;
      if (d.violation) ++rep.violations;
    }
  }
  return rep;
}

std::string stability_to_json(const StabilityProfile& p) {
  nlohmann::ordered_json j;
  j["domain_R"] = p.domain.half_side;
  j["h"] = p.h;
  j["min_max"] = p.min_max;
  j["refined_min_max"] = p.refined_min_max;
  j["argmin"] = {p.argmin.x, p.argmin.y};
  j["c2_norm"] = p.c2_norm;
  j["critical_points"] = p.critical_points;
  return j.dump(2);
}

std::string sandwich_to_json(const SandwichReport& r) {
  nlohmann::ordered_json j;
  j["R"] = r.R;
  j["beta"] = std::isfinite(r.beta) ? nlohmann::ordered_json(r.beta) : nlohmann::ordered_json("off");
  j["h"] = r.h;
  j["draws"] = r.draws;
  j["passed_stability"] = r.passed_stability;
  j["passed_closeness"] = r.passed_closeness;
  j["filtered"] = r.filtered;
  j["violations"] = r.violations;
  j["violations_unfiltered"] = r.violations_unfiltered;
  j["violation_rate"] = r.violation_rate();
  return j.dump(2);
}

Section7Field parse_section7_field(const std::string& name) {
  if (name == "f") return Section7Field::F;
  if (name == "g") return Section7Field::G;
  if (name == "monochromatic_g" || name == "mono") return Section7Field::MonochromaticG;
  throw Error(ErrorCode::InvalidParameter, "unknown field '" + name + "' (expected f, g or monochromatic_g)");
}

FieldSample section7_field(Section7Field which, const std::array<double, 6>& eps) {
  std::vector<Wave> waves;
  auto add = [&](Vec2 k, double c, double s) {
    if (c != 0.0 || s != 0.0) waves.push_back({k, c, s});
  };
  switch (which) {
    case Section7Field::F:
    case Section7Field::G:
      add({1, 0}, eps[0], 1.0 + eps[1]);
      add({3, 0}, eps[2], 0.8 + eps[3]);
      add({0, 1}, eps[4], (which == Section7Field::F ? 1.0 : 0.2) + eps[5]);
      break;
    case Section7Field::MonochromaticG:
      add({1, 0}, 2.0 + eps[0], eps[1]);
      add({std::sqrt(0.5), std::sqrt(0.5)}, eps[2], eps[3]);
      add({0, 1}, 1.0 + eps[4], eps[5]);
      break;
  }
  return FieldSample::from_waves(std::move(waves), 0.0, kKappaOne);
}

SpectralMeasure section7_measure(Section7Field which) {
  return which == Section7Field::MonochromaticG ? preset("section7_monochromatic_six_point")
                                                : preset("section7_three_pair");
}

}  // namespace nodal
