#pragma once

#include <string>
#include <vector>

#include "fhj/vec.hpp"

namespace fhj {

// Isotropic power-law Hamiltonian H(p) = c|p|^q / q with exact convex
// conjugate H*(v) = c^(1-q') |v|^{q'} / q'. The operation contracts are
// stated against the abstract growth bounds so other convex families can
// slot in later.
class PowerLawHamiltonian {
 public:
  PowerLawHamiltonian() : PowerLawHamiltonian(2.0, 1.0) {}
  PowerLawHamiltonian(double q, double c = 1.0);

  double q() const { return q_; }
  double q_dual() const { return qd_; }
  double scale() const { return c_; }
  // growth constant for the (1/C)|p|^q - C <= H <= C(|p|^q + 1) envelope
  double growth_constant() const;

  double eval_H(const Point& p) const;
  double eval_H_star(const Point& v) const;

  // exact subgradient selections; both maps send 0 to 0 and invert each
  // other away from the origin
  Point map_p(const Point& v) const;  // DH*(v)
  Point map_v(const Point& p) const;  // DH(p)

  // G(v) = sup_{rho in (0,1]} (1/rho) max_{|z|<=rho}
  //        { H*(v+z) - H*(v) - map_p(v).z },
  // evaluated on a geometric rho grid and a direction x radius net in z;
  // a lower bound on the true sup with a refinement knob.
  double growth_G(const Point& v, int directions = 64, int radii = 8,
                  int rho_levels = 9) const;

 private:
  double q_;
  double qd_;
  double c_;
};

struct ConjugateValue {
  double value = 0.0;
  bool boundary_suspect = false;  // supremum attained on the grid hull
};

// Discrete Legendre transform: sup over samples of p.v - values(v).
ConjugateValue legendre_numeric(const std::vector<Point>& grid,
                                const std::vector<double>& values,
                                const Point& p);

// Grid radius that keeps the conjugate's maximizer interior, from the
// dual growth bound.
double legendre_grid_radius(double max_p, double growth_c, double q_dual);

// Sampled effective Lagrangian with confidence half-widths, plus the
// derived effective Hamiltonian on a momentum grid.
struct EffectiveTable {
  std::vector<Point> velocities;
  std::vector<double> lbar;
  std::vector<double> half_width;
  std::vector<Point> momenta;
  std::vector<double> hbar;
  std::vector<bool> hbar_boundary_suspect;
};

}  // namespace fhj
