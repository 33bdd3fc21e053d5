#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fhj/action.hpp"
#include "fhj/env.hpp"
#include "fhj/hamiltonian.hpp"
#include "fhj/stats.hpp"
#include "fhj/vec.hpp"

namespace fhj {

struct LatticeSpec {
  Box box;
  double h = 0.125;     // spatial step
  double dt = 0.125;    // time step
  double vmax = 4.0;    // speed cap
  int subsamples = 4;   // forcing quadrature per segment

  void validate() const {
    if (h <= 0.0 || dt <= 0.0 || vmax <= 0.0)
      throw std::invalid_argument("lattice steps and vmax must be positive");
    if (vmax * dt < h - 1e-12)
      throw std::invalid_argument(
          "need vmax * dt >= h so a path can move at least one cell per step");
    for (int j = 0; j < box.dim(); ++j)
      if (!(box.lo[j] < box.hi[j]))
        throw std::invalid_argument("lattice box is empty");
    if (box.dim() < 1 || box.dim() > 2)
      throw std::invalid_argument("lattice DP supports d in {1, 2} only");
  }
};

struct LagrangianEstimate {
  double value = 0.0;
  DiscretePath minimizer;
  ActionBreakdown breakdown;
  std::string method = "dp";  // dp | dp+descent | straight-line
  Point snapped_x;
  Point snapped_y;
  bool vmax_saturated = false;    // minimizer reaches >= 98% of the cap
  bool touched_boundary = false;  // minimizer visits a hull cell
  bool box_truncated = false;     // endpoint margin below vmax (t-s) / 2
};

// Speed cap derived from the a priori bound on minimizers' L^{q'} velocity
// norm; callers double it on infeasibility and watch the saturation flag.
inline double default_vmax(const Point& x, const Point& y, double s, double t,
                           double c_hat, double q_dual) {
  double dtq = t - s;
  double ratio = std::pow((y - x).norm(), q_dual) / std::pow(dtq, q_dual - 1.0);
  return 4.0 * std::pow(c_hat * (1.0 + ratio), 1.0 / q_dual) /
         std::pow(dtq, 1.0 / q_dual);
}

namespace detail {

// Uniform cell grid over an axis-aligned box, d in {1, 2}.
struct LatticeGrid {
  Box box;
  double h = 0.0;
  int d = 0;
  int n0 = 0, n1 = 1;

  static LatticeGrid make(const Box& box, double h) {
    LatticeGrid g;
    g.box = box;
    g.h = h;
    g.d = box.dim();
    auto axis_count = [&](int j) {
      double span = (box.hi[j] - box.lo[j]) / h;
      if (!nearly_integer(span, 1e-6))
        throw std::invalid_argument("box side must be a multiple of h");
      return static_cast<int>(std::llround(span)) + 1;
    };
    g.n0 = axis_count(0);
    g.n1 = g.d == 2 ? axis_count(1) : 1;
    return g;
  }

  int cells() const { return n0 * n1; }
  Point position(int flat) const {
    Point p(d);
    int i0 = flat % n0;
    p[0] = box.lo[0] + h * static_cast<double>(i0);
    if (d == 2) p[1] = box.lo[1] + h * static_cast<double>(flat / n0);
    return p;
  }
  // nearest cell; -1 when x falls outside the box
  int cell_of(const Point& x) const {
    if (!box.contains(x, 1e-9)) return -1;
    int i0 = static_cast<int>(std::llround((x[0] - box.lo[0]) / h));
    i0 = std::clamp(i0, 0, n0 - 1);
    if (d == 1) return i0;
    int i1 = static_cast<int>(std::llround((x[1] - box.lo[1]) / h));
    i1 = std::clamp(i1, 0, n1 - 1);
    return i0 + n0 * i1;
  }
  bool on_hull(int flat) const {
    int i0 = flat % n0;
    if (i0 == 0 || i0 == n0 - 1) return true;
    if (d == 2) {
      int i1 = flat / n0;
      if (i1 == 0 || i1 == n1 - 1) return true;
    }
    return false;
  }
};

struct Offset {
  int o0 = 0, o1 = 0;
  double hstar_dt = 0.0;  // H*(offset velocity) * dt, precomputed
};

inline std::vector<Offset> reachable_offsets(const LatticeGrid& grid,
                                             const PowerLawHamiltonian& H,
                                             double dt, double vmax) {
  int reach = static_cast<int>(std::floor(vmax * dt / grid.h + 1e-9));
  std::vector<Offset> offs;
  int lo1 = grid.d == 2 ? -reach : 0;
  int hi1 = grid.d == 2 ? reach : 0;
  for (int o1 = lo1; o1 <= hi1; ++o1) {
    for (int o0 = -reach; o0 <= reach; ++o0) {
      Point disp(grid.d);
      disp[0] = grid.h * static_cast<double>(o0);
      if (grid.d == 2) disp[1] = grid.h * static_cast<double>(o1);
      if (disp.norm() > vmax * dt + 1e-9) continue;
      Offset o;
      o.o0 = o0;
      o.o1 = o1;
      o.hstar_dt = H.eval_H_star(disp / dt) * dt;
      offs.push_back(o);
    }
  }
  return offs;
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One Bellman recursion over time slices:
//   V_{k+1}(z') = min over reachable z of
//     V_k(z) + cost_scale * (H*((z'-z)/dt) dt + segment forcing).
// Relaxations within a slice read only the previous slice, so the result
// is independent of any parallel schedule. Ties go to the lowest source
// cell index. on_slice is called with (k, V_k) for k = 0..K.
template <SpatialField F>
void bellman_sweep(const F& field, const BrownianPath& B,
                   const LatticeGrid& grid, const PowerLawHamiltonian& H,
                   double dt, double vmax, int subsamples, double t_start,
                   int K, double cost_scale, std::vector<double>& V,
                   const std::function<void(int, const std::vector<double>&)>&
                       on_slice,
                   std::vector<std::vector<int32_t>>* preds) {
  auto offs = reachable_offsets(grid, H, dt, vmax);
  if (preds) preds->assign(K, std::vector<int32_t>(grid.cells(), -1));

  // bounding box of finite entries, grown by the reach each slice
  int reach = static_cast<int>(std::floor(vmax * dt / grid.h + 1e-9));
  int f0lo = grid.n0, f0hi = -1, f1lo = grid.n1, f1hi = -1;
  for (int c = 0; c < grid.cells(); ++c) {
    if (V[c] == kInf) continue;
    int i0 = c % grid.n0, i1 = c / grid.n0;
    f0lo = std::min(f0lo, i0);
    f0hi = std::max(f0hi, i0);
    f1lo = std::min(f1lo, i1);
    f1hi = std::max(f1hi, i1);
  }
  if (f0hi < 0) throw std::invalid_argument("no finite source cell");

  if (on_slice) on_slice(0, V);
  std::vector<double> next(grid.cells());
  for (int k = 0; k < K; ++k) {
    double t0 = t_start + dt * static_cast<double>(k);
    double t1 = t0 + dt;
    int g0lo = std::max(0, f0lo - reach), g0hi = std::min(grid.n0 - 1, f0hi + reach);
    int g1lo = std::max(0, f1lo - reach), g1hi = std::min(grid.n1 - 1, f1hi + reach);
    std::fill(next.begin(), next.end(), kInf);
    for (int i1 = g1lo; i1 <= g1hi; ++i1) {
      for (int i0 = g0lo; i0 <= g0hi; ++i0) {
        int target = i0 + grid.n0 * i1;
        Point tp = grid.position(target);
        double best = kInf;
        int32_t best_src = -1;
        for (const auto& o : offs) {
          int s0 = i0 - o.o0;
          if (s0 < 0 || s0 >= grid.n0) continue;
          int s1 = i1 - o.o1;
          if (s1 < 0 || s1 >= grid.n1) continue;
          int src = s0 + grid.n0 * s1;
          double base = V[src];
          if (base == kInf) continue;
          Point sp = grid.position(src);
          double cost =
              base + cost_scale * (o.hstar_dt + segment_forcing(field, B, sp,
                                                                tp, t0, t1,
                                                                subsamples));
          if (cost < best || (cost == best && src < best_src)) {
            best = cost;
            best_src = src;
          }
        }
        next[target] = best;
        if (preds && best_src >= 0) (*preds)[k][target] = best_src;
      }
    }
    V.swap(next);
    f0lo = g0lo;
    f0hi = g0hi;
    f1lo = g1lo;
    f1hi = g1hi;
    if (on_slice) on_slice(k + 1, V);
  }
}

}  // namespace detail

// Random Lagrangian L(x, y, s, t) by Bellman recursion over time slices on
// a uniform space-time lattice, with the argmin path backtracked.
template <SpatialField F>
LagrangianEstimate dp_lagrangian_impl(const Point& x, const Point& y, double s,
                                      double t, const F& field,
                                      const BrownianPath& B,
                                      const PowerLawHamiltonian& H,
                                      const LatticeSpec& lat) {
  lat.validate();
  if (!(s < t)) throw std::invalid_argument("need s < t");
  if (!nearly_integer((t - s) / lat.dt))
    throw std::invalid_argument("(t - s) must be a multiple of the time step");
  auto grid = detail::LatticeGrid::make(lat.box, lat.h);
  int K = static_cast<int>(std::llround((t - s) / lat.dt));
  int cx = grid.cell_of(x);
  int cy = grid.cell_of(y);
  if (cx < 0 || cy < 0)
    throw std::invalid_argument("endpoints must lie inside the lattice box");

  std::vector<double> V(grid.cells(), detail::kInf);
  V[cx] = 0.0;
  std::vector<std::vector<int32_t>> preds;
  detail::bellman_sweep(field, B, grid, H, lat.dt, lat.vmax, lat.subsamples, s,
                        K, 1.0, V, nullptr, &preds);
  if (V[cy] == detail::kInf)
    throw std::runtime_error(
        "endpoint unreachable at this speed cap; enlarge vmax");

  LagrangianEstimate est;
  est.value = V[cy];
  est.snapped_x = grid.position(cx);
  est.snapped_y = grid.position(cy);
  est.method = "dp";
  double need = 0.5 * lat.vmax * (t - s);
  est.box_truncated = std::min(lat.box.margin(est.snapped_x),
                               lat.box.margin(est.snapped_y)) < need;

  est.minimizer.s = s;
  est.minimizer.t = t;
  est.minimizer.nodes.assign(static_cast<std::size_t>(K) + 1, Point(grid.d));
  int cur = cy;
  for (int k = K; k >= 1; --k) {
    est.minimizer.nodes[k] = grid.position(cur);
    est.touched_boundary = est.touched_boundary || grid.on_hull(cur);
    cur = preds[k - 1][cur];
  }
  est.minimizer.nodes[0] = grid.position(cur);
  est.touched_boundary = est.touched_boundary || grid.on_hull(cur);

  est.breakdown = total_action(est.minimizer, field, B, H, lat.subsamples);
  for (int k = 0; k < est.minimizer.segments(); ++k)
    if (est.minimizer.velocity(k).norm() >= 0.98 * lat.vmax)
      est.vmax_saturated = true;
  return est;
}

inline LagrangianEstimate dp_lagrangian(const Point& x, const Point& y,
                                        double s, double t,
                                        const RandomEnvironment& env,
                                        const PowerLawHamiltonian& H,
                                        const LatticeSpec& lat) {
  return dp_lagrangian_impl(x, y, s, t, env.field, env.path, H, lat);
}

// Continuous polish of the lattice minimizer. Interior nodes are moved by
// golden-section line search along hat-shaped perturbations at dyadic
// strides, sweeping coarse to fine; the coarse levels move the slow modes
// that plain per-node descent barely touches. Each move is accepted only
// when it lowers the local action, so the value never increases.
template <SpatialField F>
LagrangianEstimate descent_refine_impl(const LagrangianEstimate& input,
                                       const F& field, const BrownianPath& B,
                                       const PowerLawHamiltonian& H,
                                       int iterations) {
  if (input.minimizer.segments() < 2) return input;
  DiscretePath path = input.minimizer;
  const int subsamples = 4;
  const int K = path.segments();
  const int d = path.nodes[0].dim();
  const double dt = path.dt();
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);

  auto window_action = [&](int lo, int hi) {
    double a = 0.0;
    for (int k = lo; k < hi; ++k) {
      a += H.eval_H_star(path.velocity(k)) * dt;
      a += segment_forcing(field, B, path.nodes[k], path.nodes[k + 1],
                           path.time_at(k), path.time_at(k + 1), subsamples);
    }
    return a;
  };

  std::vector<double> saved;
  // one golden-section minimization of the hat move at (center, stride, axis)
  auto relax_hat = [&](int center, int stride, int axis) {
    int lo_node = std::max(1, center - stride + 1);
    int hi_node = std::min(K - 1, center + stride - 1);
    int lo_seg = std::max(0, center - stride);
    int hi_seg = std::min(K, center + stride);
    saved.resize(static_cast<std::size_t>(hi_node - lo_node) + 1);
    for (int i = lo_node; i <= hi_node; ++i)
      saved[static_cast<std::size_t>(i - lo_node)] = path.nodes[i][axis];
    auto apply = [&](double xi) {
      for (int i = lo_node; i <= hi_node; ++i) {
        double w = 1.0 - std::abs(i - center) / static_cast<double>(stride);
        path.nodes[i][axis] =
            saved[static_cast<std::size_t>(i - lo_node)] + xi * w;
      }
      return window_action(lo_seg, hi_seg);
    };

    double f0 = window_action(lo_seg, hi_seg);
    double w = 2.0 * dt * static_cast<double>(stride) +
               (path.nodes[hi_seg] - path.nodes[lo_seg]).norm();
    double lo = -w, hi = w;
    double x1 = hi - golden * (hi - lo);
    double x2 = lo + golden * (hi - lo);
    double f1 = apply(x1), f2 = apply(x2);
    for (int it = 0; it < 32 && hi - lo > 1e-11 * (1.0 + w); ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - golden * (hi - lo);
        f1 = apply(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + golden * (hi - lo);
        f2 = apply(x2);
      }
    }
    double xbest = f1 < f2 ? x1 : x2;
    double fbest = std::min(f1, f2);
    if (fbest < f0) {
      apply(xbest);
      return f0 - fbest;
    }
    apply(0.0);
    return 0.0;
  };

  int top_stride = 1;
  while (2 * top_stride < K) top_stride *= 2;

  for (int cycle = 0; cycle < iterations; ++cycle) {
    double cycle_gain = 0.0;
    for (int stride = top_stride; stride >= 1; stride /= 2) {
      for (int pass = 0; pass < 6; ++pass) {
        double gain = 0.0;
        for (int center = stride; center <= K - 1; center += stride) {
          for (int axis = 0; axis < d; ++axis)
            gain += relax_hat(center, stride, axis);
        }
        cycle_gain += gain;
        if (gain < 1e-9) break;
      }
    }
    if (cycle_gain < 1e-8) break;
  }

  LagrangianEstimate out = input;
  out.minimizer = path;
  out.breakdown = total_action(path, field, B, H, subsamples);
  out.value = out.breakdown.total;
  out.method = input.method + "+descent";
  if (out.value > input.value) return input;  // fp guard; never increase
  return out;
}

inline LagrangianEstimate descent_refine(const LagrangianEstimate& input,
                                         const RandomEnvironment& env,
                                         const PowerLawHamiltonian& H,
                                         int iterations) {
  return descent_refine_impl(input, env.field, env.path, H, iterations);
}

// L_{eps,f}(x, y, s, t) with noise amplitude eps^(theta - 1/2): computed in
// the microscopic frame as eps * L(x/eps, y/eps, s/eps, t/eps) with the
// field amplitudes scaled by eps^(theta - 1/2) and the environment's own
// Brownian path. theta = 1/2 reproduces the standard eps-scaling exactly.
// The lattice is given in macroscopic units and converted.
inline LatticeSpec micro_lattice(const LatticeSpec& lat, double eps) {
  LatticeSpec m = lat;
  for (int j = 0; j < m.box.dim(); ++j) {
    m.box.lo[j] = lat.box.lo[j] / eps;
    m.box.hi[j] = lat.box.hi[j] / eps;
  }
  m.h = lat.h / eps;
  m.dt = lat.dt / eps;
  return m;
}

inline LagrangianEstimate scaled_lagrangian(const Point& x, const Point& y,
                                            double s, double t, double eps,
                                            double theta,
                                            const RandomEnvironment& env,
                                            const PowerLawHamiltonian& H,
                                            const LatticeSpec& lat) {
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
  double amp = std::pow(eps, theta - 0.5);
  RandomField micro_field = env.field.scaled_amplitudes(amp);
  LatticeSpec mlat = micro_lattice(lat, eps);
  LagrangianEstimate est =
      dp_lagrangian_impl(x / eps, y / eps, s / eps, t / eps, micro_field,
                         env.path, H, mlat);
  est.value *= eps;
  est.breakdown.kinetic *= eps;
  est.breakdown.forcing *= eps;
  est.breakdown.total *= eps;
  est.snapped_x *= eps;
  est.snapped_y *= eps;
  est.minimizer.s *= eps;
  est.minimizer.t *= eps;
  for (auto& nd : est.minimizer.nodes) nd *= eps;
  return est;
}

struct SubadditivityTriple {
  Point x, z, y;
  double s = 0.0, r = 0.0, t = 0.0;
};

struct SubadditivityReport {
  int checked = 0;
  int violations = 0;
  double worst_excess = 0.0;  // max of L(x,y) - L(x,z) - L(z,y)
  std::vector<std::string> failures;
};

template <SpatialField F>
SubadditivityReport check_subadditivity_impl(
    const F& field, const BrownianPath& B, const PowerLawHamiltonian& H,
    const LatticeSpec& lat, const std::vector<SubadditivityTriple>& triples) {
  SubadditivityReport rep;
  // a duration-zero leg carries zero action when its endpoints coincide
  auto leg = [&](const Point& a, const Point& b, double ta, double tb) {
    if (tb - ta < 1e-12) {
      if ((b - a).norm() > 1e-12)
        throw std::invalid_argument(
            "degenerate leg with distinct endpoints in subadditivity triple");
      return 0.0;
    }
    return dp_lagrangian_impl(a, b, ta, tb, field, B, H, lat).value;
  };
  for (const auto& tr : triples) {
    double whole = leg(tr.x, tr.y, tr.s, tr.t);
    double first = leg(tr.x, tr.z, tr.s, tr.r);
    double second = leg(tr.z, tr.y, tr.r, tr.t);
    double excess = whole - first - second;
    rep.worst_excess = std::max(rep.worst_excess, excess);
    ++rep.checked;
    double tol = 1e-9 * std::max({1.0, std::abs(whole), std::abs(first),
                                  std::abs(second)});
    if (excess > tol) {
      ++rep.violations;
      rep.failures.push_back(
          "subadditivity violated by " + std::to_string(excess) +
          " at triple with r = " + std::to_string(tr.r));
    }
  }
  return rep;
}

inline SubadditivityReport check_subadditivity(
    const RandomEnvironment& env, const PowerLawHamiltonian& H,
    const LatticeSpec& lat, const std::vector<SubadditivityTriple>& triples) {
  return check_subadditivity_impl(env.field, env.path, H, lat, triples);
}

struct GrowthSample {
  Point x, y;
  double s = 0.0, t = 0.0;
  double value = 0.0;
};

struct GrowthReport {
  double c_hat = 1.0;  // fitted envelope constant
  double alpha = 0.45; // time-regularity exponent used
  std::vector<GrowthSample> samples;
};

// Fits the empirical envelope constant and checks the two-sided growth
// bound; also regresses the spatial growth and short-time blowup exponents.
template <SpatialField F>
GrowthReport check_growth_impl(const F& field, const BrownianPath& B,
                               const PowerLawHamiltonian& H,
                               const LatticeSpec& lat,
                               const std::vector<GrowthSample>& queries) {
  GrowthReport rep;
  double qd = H.q_dual();
  rep.samples = queries;
  for (auto& gs : rep.samples) {
    gs.value =
        dp_lagrangian_impl(gs.x, gs.y, gs.s, gs.t, field, B, H, lat).value;
    double A = std::pow((gs.y - gs.x).norm(), qd) /
               std::pow(gs.t - gs.s, qd - 1.0);
    double Bt = std::pow(gs.t - gs.s, rep.alpha);
    // smallest C satisfying both envelope sides for this sample
    double c_up = gs.value / (A + Bt);
    double c_lo =
        (-gs.value + std::sqrt(gs.value * gs.value + 4.0 * A * Bt)) /
        (2.0 * Bt);
    rep.c_hat = std::max({rep.c_hat, c_up, c_lo});
  }
  return rep;
}

inline GrowthReport check_growth(const RandomEnvironment& env,
                                 const PowerLawHamiltonian& H,
                                 const LatticeSpec& lat,
                                 const std::vector<GrowthSample>& queries) {
  return check_growth_impl(env.field, env.path, H, lat, queries);
}

}  // namespace fhj
