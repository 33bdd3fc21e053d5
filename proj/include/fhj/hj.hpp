#pragma once

#include <string>
#include <vector>

#include "fhj/env.hpp"
#include "fhj/hamiltonian.hpp"
#include "fhj/optimizer.hpp"
#include "fhj/vec.hpp"

namespace fhj {

// Bounded, uniformly continuous initial data on the computational box.
struct InitialDatum {
  enum class Kind { linear, bump, cone, tabulated };
  Kind kind = Kind::linear;
  Point slope;          // linear: slope . x
  Point center;         // bump / cone
  double height = 1.0;  // bump amplitude or cone slope
  double width = 1.0;   // bump width
  // tabulated (d = 1): piecewise-linear interpolation of (tab_x, tab_v)
  std::vector<double> tab_x;
  std::vector<double> tab_v;
  double modulus = 0.0;  // recorded Lipschitz-type modulus for tabulated data

  double eval(const Point& x) const;
  double sup_norm(const Box& box, int samples_per_axis = 257) const;

  static InitialDatum linear(const Point& p);
  static InitialDatum bump(const Point& center, double height, double width);
  static InitialDatum cone(const Point& center, double slope);
  static InitialDatum tabulated(std::vector<double> xs, std::vector<double> vs);
};

struct SolutionField {
  Box box;
  double h = 0.0;
  int n0 = 0, n1 = 1;
  std::vector<Point> positions;            // macroscopic grid nodes
  std::vector<double> times;
  std::vector<std::vector<double>> values; // values[ti][cell]
  std::string method;
  std::vector<double> localization;        // localization radius per time
  bool truncated = false;                  // localization ball leaves the box

  double value_at(const Point& x, int time_index) const;  // nearest node
  int time_index(double t) const;
};

// Localization radius for the Hopf-Lax infimum, from the empirical growth
// envelope constants; monotone in t and in the sup-norm of the datum.
double localization_radius(double u0_sup_norm, double t, double c_hat,
                           double q_dual);

// Hopf-Lax solution of u_t + H(Du) = eps^theta f(x/eps) . dB^eps(t) via one
// min-plus forward sweep: V_0 = u0 on every cell, then the same Bellman
// recursion as the Lagrangian DP, run in the microscopic frame. Requested
// times must be multiples of the lattice time step.
SolutionField hopf_lax_solve(const InitialDatum& u0,
                             const RandomEnvironment& env, double eps,
                             double theta, const PowerLawHamiltonian& H,
                             const LatticeSpec& lat,
                             const std::vector<double>& times);

// Monotone Lax-Friedrichs scheme on the transformed equation
//   w_t + H(Dw + Dzeta(x, t)) = 0,  w = u - zeta,
// with zeta(x, t) = eps^theta f(x/eps) . B^eps(t) frozen at each step
// midpoint, then u = w + zeta added back. cfl must lie in (0, 1].
SolutionField fd_transformed_solve(const InitialDatum& u0,
                                   const RandomEnvironment& env, double eps,
                                   double theta,
                                   const PowerLawHamiltonian& H,
                                   const LatticeSpec& grid, double cfl,
                                   const std::vector<double>& times,
                                   std::vector<std::string>* warnings = nullptr);

}  // namespace fhj
