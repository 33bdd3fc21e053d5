#pragma once

#include <cstdint>
#include <vector>

#include "fhj/action.hpp"
#include "fhj/env.hpp"
#include "fhj/optimizer.hpp"
#include "fhj/vec.hpp"

namespace fhj {

// f(x) = x in d = m = 1. Deliberately violates the C^1 boundedness budget,
// so it lives here instead of the environment module; the quadratic-kinetic
// action with this field has a closed-form minimizer and value.
struct LinearField {
  ChanVec value(const Point& x) const {
    ChanVec out(1);
    out[0] = x[0];
    return out;
  }
  ChanMat jacobian(const Point&) const {
    ChanMat out(1, 1);
    out.row[0][0] = 1.0;
    return out;
  }
  int dim() const { return 1; }
  int channels() const { return 1; }
};

struct PsiFixture {
  double a = 0.0;
  double b = 1.0;
  BrownianPath path;  // scalar path whose grid covers [a, b]
  int subsamples = 4;

  void validate() const;
};

// psi([a,b)) = ((1/(b-a)) (int_a^b B)^2 - int_a^b B^2) / 2,
// integrals by composite trapezoid on the path grid.
double psi_value(const PsiFixture& fix);

// gamma*_t = int_a^t (B_s - (1/(b-a)) int_a^b B_r dr) ds by cumulative
// trapezoid; starts and ends at 0 up to quadrature tolerance.
DiscretePath psi_minimizer(const PsiFixture& fix);

struct PsiMeanStats {
  double mean = 0.0;  // Monte Carlo mean of (1/T) psi([0,T))
  double se = 0.0;
  int samples = 0;
};

PsiMeanStats psi_mean_stats(double T, double dt, int samples,
                            uint64_t master_seed, int workers = 0);

struct PsiDpRow {
  int realization = 0;
  double psi_closed_form = 0.0;
  double dp_value = 0.0;
  double relative_error = 0.0;
  double path_distance = 0.0;  // sup distance, refined path vs gamma*
  bool excluded = false;       // DP minimizer reached the lattice boundary
};

struct PsiDpReport {
  std::vector<PsiDpRow> rows;
  int excluded = 0;
  double fraction_within(double rel_tol) const;
  double fraction_path_within(double dist_tol) const;
};

// Cross-validation of the lattice optimizer against the closed form:
// dp_lagrangian(0,0,0,T) + descent versus psi_value, per realization.
PsiDpReport psi_vs_dp(double T, const LatticeSpec& lat, double path_dt,
                      int samples, uint64_t master_seed, int workers = 0);

}  // namespace fhj
