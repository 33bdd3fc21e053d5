#include "fhj/hamiltonian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fhj {

PowerLawHamiltonian::PowerLawHamiltonian(double q, double c)
    : q_(q), qd_(q / (q - 1.0)), c_(c) {
  if (q <= 1.0) throw std::invalid_argument("exponent q must exceed 1");
  if (c <= 0.0) throw std::invalid_argument("scale c must be positive");
}

double PowerLawHamiltonian::growth_constant() const {
  return std::max(c_, 1.0 / c_) + 1.0;
}

double PowerLawHamiltonian::eval_H(const Point& p) const {
  return c_ * std::pow(p.norm(), q_) / q_;
}

double PowerLawHamiltonian::eval_H_star(const Point& v) const {
  return std::pow(c_, 1.0 - qd_) * std::pow(v.norm(), qd_) / qd_;
}

Point PowerLawHamiltonian::map_p(const Point& v) const {
  double n = v.norm();
  if (n == 0.0) return Point(v.dim());
  return std::pow(c_, 1.0 - qd_) * std::pow(n, qd_ - 2.0) * v;
}

Point PowerLawHamiltonian::map_v(const Point& p) const {
  double n = p.norm();
  if (n == 0.0) return Point(p.dim());
  return c_ * std::pow(n, q_ - 2.0) * p;
}

double PowerLawHamiltonian::growth_G(const Point& v, int directions, int radii,
                                     int rho_levels) const {
  int d = v.dim();
  Point pv = map_p(v);
  double hv = eval_H_star(v);
  double best = 0.0;
  for (int lev = 0; lev < rho_levels; ++lev) {
    double rho = std::pow(2.0, -(rho_levels - 1 - lev));  // 2^-(L-1) .. 1
    double inner = 0.0;
    auto probe = [&](const Point& z) {
      double r = eval_H_star(v + z) - hv - pv.dot(z);
      if (r > inner) inner = r;
    };
    if (d == 1) {
      for (int i = 1; i <= radii; ++i) {
        double r = rho * static_cast<double>(i) / static_cast<double>(radii);
        probe(Point{r});
        probe(Point{-r});
      }
    } else {
      for (int a = 0; a < directions; ++a) {
        double ang = 2.0 * std::numbers::pi * static_cast<double>(a) /
                     static_cast<double>(directions);
        Point dir(d);
        dir[0] = std::cos(ang);
        dir[1] = std::sin(ang);
        if (d == 3) dir[2] = 0.0;  // d = 3 fields only ever query d <= 2 here
        for (int i = 1; i <= radii; ++i) {
          double r = rho * static_cast<double>(i) / static_cast<double>(radii);
          probe(r * dir);
        }
      }
    }
    best = std::max(best, inner / rho);
  }
  return best;
}

ConjugateValue legendre_numeric(const std::vector<Point>& grid,
                                const std::vector<double>& values,
                                const Point& p) {
  if (grid.size() != values.size() || grid.empty())
    throw std::invalid_argument("legendre_numeric: mismatched or empty table");
  ConjugateValue out;
  out.value = -1e300;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double s = p.dot(grid[i]) - values[i];
    if (s > out.value) {
      out.value = s;
      arg = i;
    }
  }
  // boundary check against the axis-aligned hull of the sample points
  int d = grid[0].dim();
  Point lo = grid[0], hi = grid[0];
  for (const auto& g : grid)
    for (int j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], g[j]);
      hi[j] = std::max(hi[j], g[j]);
    }
  double tol = 1e-12;
  for (int j = 0; j < d; ++j) {
    double span = hi[j] - lo[j];
    if (span <= 0.0) continue;
    tol = std::max(tol, 1e-9 * span);
    if (grid[arg][j] <= lo[j] + tol || grid[arg][j] >= hi[j] - tol)
      out.boundary_suspect = true;
  }
  return out;
}

double legendre_grid_radius(double max_p, double growth_c, double q_dual) {
  return std::pow(2.0 * max_p * growth_c, 1.0 / (q_dual - 1.0)) + 1.0;
}

}  // namespace fhj
