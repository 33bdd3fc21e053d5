#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fhj/env.hpp"
#include "fhj/hamiltonian.hpp"
#include "fhj/hj.hpp"
#include "fhj/optimizer.hpp"
#include "fhj/vec.hpp"

namespace fhj {

struct SubadditiveSchedule {
  std::vector<double> horizons = {4.0, 8.0, 16.0, 32.0};  // increasing
  int samples = 128;          // realizations per horizon
  std::vector<Point> velocities;
  double box_margin = 8.0;    // spatial slack around the chord 0 -> Tv
  double path_dt = 0.125;     // Brownian grid step

  void validate() const;
};

struct ConvergenceRow {
  double horizon = 0.0;
  double mean = 0.0;
  double se = 0.0;
  int truncated = 0;  // realizations whose minimizer touched the box
  int saturated = 0;  // realizations whose minimizer reached the speed cap
};

struct LbarEstimate {
  double value = 0.0;       // largest-horizon Monte Carlo mean of L/T
  double half_width = 0.0;  // one standard error
  std::vector<ConvergenceRow> table;
  bool converged = true;    // successive means within 3 combined SE
  int truncated_realizations = 0;
};

// (1/T) L(0, Tv, 0, T) averaged over independent environments for each
// horizon of the schedule; the largest horizon provides the estimate.
LbarEstimate estimate_Lbar(const Point& v, const SubadditiveSchedule& sch,
                           const FieldSpec& spec,
                           const PowerLawHamiltonian& H,
                           const LatticeSpec& base_lat, uint64_t master_seed,
                           int workers = 0);

// Lower convex envelope of a sampled 1-d profile (values at the same
// abscissae); suppresses Monte Carlo noise before conjugation.
std::vector<double> lower_convex_envelope(const std::vector<double>& xs,
                                          const std::vector<double>& vals);

// H_bar on the momentum grid as the discrete conjugate of the convexified
// L_bar samples.
EffectiveTable effective_hamiltonian(const std::vector<Point>& velocities,
                                     const std::vector<double>& lbar,
                                     const std::vector<double>& half_width,
                                     const std::vector<Point>& momenta);

struct EnhancementCertificate {
  Point velocity;
  double block_length = 0.0;  // M
  double delta = 0.0;
  int blocks = 0;             // N
  double bound = 0.0;         // certified upper bound on L_bar(v), mean
  double half_width = 0.0;    // one standard error
  double h_star = 0.0;        // reference H*(v)
  double gap = 0.0;           // H*(v) - bound
  int samples = 0;
};

// Paper-shaped default tent parameters: M = 4 (1 + G(v))^2 / (E|Df|^2)^2
// and delta = (E|Df|^2)^{1/lambda} clamped to M/2 (the theorem's constant
// is existential; unit constant used, overridable).
void default_tent_parameters(const FieldSpec& spec,
                             const PowerLawHamiltonian& H, const Point& v,
                             double lambda, double* M, double* delta);

// Upper bound on L_bar(v) from tent-perturbed block paths
//   gamma_r = v r + delta u_k eta((r - kM)/M),  eta_r = 1 - |2r - 1|,
// minimizing each block over a fixed direction net plus u = 0.
EnhancementCertificate tent_upper_bound(const Point& v, double M, double delta,
                                        int blocks, const FieldSpec& spec,
                                        const PowerLawHamiltonian& H,
                                        uint64_t master_seed, int samples,
                                        double path_dt, int subsamples = 4,
                                        int workers = 0);

struct EnhancementGap {
  double measured = 0.0;   // H_bar(p) - H(p)
  double reference = 0.0;  // (E|Df|^2)^{2+1/lambda} / (1 + G(v(p)))
  bool boundary_suspect = false;
};

EnhancementGap enhancement_gap(const Point& p, const EffectiveTable& table,
                               const FieldSpec& spec,
                               const PowerLawHamiltonian& H,
                               double lambda = 0.225);

struct ScalingRow {
  double theta = 0.0;
  double eps = 0.0;
  double median_u = 0.0;
  double se_median = 0.0;
  double dist_noiseless = 0.0;
  double dist_hbar = 0.0;  // only for theta = 1/2 runs
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double u_noiseless = 0.0;
  double u_hbar = 0.0;     // Hopf-Lax value built from the estimated L_bar
  double u_hbar_se = 0.0;  // propagated from the L_bar half-width
  std::vector<std::string> classifications;  // one line per theta
};

ScalingReport scaling_study(const std::vector<double>& theta_list,
                            const std::vector<double>& eps_list,
                            const Point& probe_x, double probe_t,
                            const InitialDatum& u0, const FieldSpec& spec,
                            const PowerLawHamiltonian& H,
                            const LatticeSpec& lat, int samples,
                            uint64_t master_seed, int workers = 0);

struct TailsRow {
  double eps = 0.0;
  double median_seminorm = 0.0;
  double excess = 0.0;  // median minus the noise-free baseline
  std::vector<double> seminorms;  // per-realization values, by index
};

struct TailsReport {
  std::vector<TailsRow> rows;
  double baseline = 0.0;   // noise-free Holder seminorm
  double slope = 0.0;      // log-log slope of excess vs eps
  double theta_reg = 0.3;  // spatial Holder exponent used
};

TailsReport regularity_tails(const std::vector<double>& eps_list, double R,
                             int samples, const LatticeSpec& lat,
                             const FieldSpec& spec,
                             const PowerLawHamiltonian& H,
                             uint64_t master_seed, int workers = 0);

struct HomogConvergenceProbe {
  Point x, y;
  double s = 0.0, t = 1.0;
};

struct HomogConvergenceRow {
  double eps = 0.0;
  double mean_discrepancy = 0.0;  // max over probes, averaged over samples
  double se = 0.0;
};

struct HomogConvergenceReport {
  std::vector<HomogConvergenceRow> rows;
  bool decreasing_within_3se = true;
};

HomogConvergenceReport homog_convergence(
    const std::vector<HomogConvergenceProbe>& probes,
    const std::vector<double>& eps_list, const FieldSpec& spec,
    const PowerLawHamiltonian& H, const LatticeSpec& lat,
    const SubadditiveSchedule& lbar_schedule, int samples,
    uint64_t master_seed, int workers = 0);

}  // namespace fhj
