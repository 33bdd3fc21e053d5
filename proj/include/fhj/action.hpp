#pragma once

#include <concepts>
#include <stdexcept>
#include <vector>

#include "fhj/env.hpp"
#include "fhj/hamiltonian.hpp"
#include "fhj/vec.hpp"

namespace fhj {

template <class F>
concept SpatialField = requires(const F& f, const Point& x) {
  { f.value(x) } -> std::convertible_to<ChanVec>;
  { f.jacobian(x) } -> std::convertible_to<ChanMat>;
  { f.dim() } -> std::convertible_to<int>;
  { f.channels() } -> std::convertible_to<int>;
};

// Piecewise-linear candidate path on a uniform time grid.
struct DiscretePath {
  double s = 0.0;
  double t = 1.0;
  std::vector<Point> nodes;

  int segments() const { return static_cast<int>(nodes.size()) - 1; }
  double dt() const { return (t - s) / static_cast<double>(segments()); }
  double time_at(int k) const { return s + dt() * static_cast<double>(k); }
  Point velocity(int k) const { return (nodes[k + 1] - nodes[k]) / dt(); }

  void validate() const {
    if (!(s < t)) throw std::invalid_argument("path needs s < t");
    if (segments() < 1) throw std::invalid_argument("path needs >= 1 segment");
  }

  static DiscretePath straight(const Point& x, const Point& y, double s,
                               double t, int segments) {
    DiscretePath p;
    p.s = s;
    p.t = t;
    p.nodes.resize(static_cast<std::size_t>(segments) + 1);
    for (int k = 0; k <= segments; ++k) {
      double w = static_cast<double>(k) / static_cast<double>(segments);
      p.nodes[k] = (1.0 - w) * x + w * y;
    }
    return p;
  }
};

struct ActionBreakdown {
  double kinetic = 0.0;
  double forcing = 0.0;
  double total = 0.0;
};

// Exact for piecewise-linear paths: the velocity is constant per segment.
inline double kinetic_action(const DiscretePath& path,
                             const PowerLawHamiltonian& H) {
  path.validate();
  double dt = path.dt();
  double sum = 0.0;
  for (int k = 0; k < path.segments(); ++k)
    sum += H.eval_H_star(path.velocity(k)) * dt;
  return sum;
}

inline void check_alignment(const DiscretePath& path, const BrownianPath& B) {
  double ratio = path.dt() / B.dt();
  if (!nearly_integer(ratio) || ratio < 1.0 - 1e-9)
    throw std::invalid_argument(
        "path step must be an integer multiple of the Brownian grid step");
  if (!B.on_grid(path.s))
    throw std::invalid_argument("path start time is off the Brownian grid");
  if (path.t > B.horizon() + 1e-9 || path.s < -1e-9)
    throw std::invalid_argument("path leaves the sampled Brownian horizon");
}

// Integration-by-parts value of int f(gamma) . dB over one straight segment
// from (a, t0) to (b, t1), anchored at B(t0):
//   f(b).(B(t1) - B(t0)) - int (Df(gamma_r) v).(B_r - B(t0)) dr,
// the Riemann integral by composite trapezoid with `subsamples`
// sub-intervals, B linearly interpolated. Anchoring at B(t0) makes the
// value invariant under constant shifts of B, so time-shift covariance and
// interval additivity hold at summation accuracy.
// Pre: t0, t1 on the Brownian grid (checked by callers once per path).
template <SpatialField F>
double segment_forcing(const F& field, const BrownianPath& B, const Point& a,
                       const Point& b, double t0, double t1, int subsamples) {
  if (subsamples < 1) throw std::invalid_argument("subsamples must be >= 1");
  ChanVec b0 = B.at(t0);
  ChanVec db = B.at(t1) - b0;
  double boundary = field.value(b).dot(db);

  double len = t1 - t0;
  double hsub = len / static_cast<double>(subsamples);
  Point v = (b - a) / len;
  // trapezoid; the integrand vanishes at r = t0 by the anchoring
  double integral = 0.0;
  for (int j = 1; j <= subsamples; ++j) {
    double w = (j == subsamples) ? 0.5 : 1.0;
    double r = t0 + hsub * static_cast<double>(j);
    double frac = static_cast<double>(j) / static_cast<double>(subsamples);
    Point pos = a + (b - a) * frac;
    ChanVec rel = B.at(r) - b0;
    integral += w * field.jacobian(pos).apply(v).dot(rel);
  }
  return boundary - integral * hsub;
}

template <SpatialField F>
double forcing_integral(const DiscretePath& path, const F& field,
                        const BrownianPath& B, int subsamples) {
  path.validate();
  check_alignment(path, B);
  double sum = 0.0;
  for (int k = 0; k < path.segments(); ++k)
    sum += segment_forcing(field, B, path.nodes[k], path.nodes[k + 1],
                           path.time_at(k), path.time_at(k + 1), subsamples);
  return sum;
}

inline double forcing_integral(const DiscretePath& path,
                               const RandomEnvironment& env, int subsamples) {
  return forcing_integral(path, env.field, env.path, subsamples);
}

template <SpatialField F>
ActionBreakdown total_action(const DiscretePath& path, const F& field,
                             const BrownianPath& B,
                             const PowerLawHamiltonian& H, int subsamples) {
  ActionBreakdown out;
  out.kinetic = kinetic_action(path, H);
  out.forcing = forcing_integral(path, field, B, subsamples);
  out.total = out.kinetic + out.forcing;
  return out;
}

inline ActionBreakdown total_action(const DiscretePath& path,
                                    const RandomEnvironment& env,
                                    const PowerLawHamiltonian& H,
                                    int subsamples) {
  return total_action(path, env.field, env.path, H, subsamples);
}

}  // namespace fhj
