#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fhj/rng.hpp"
#include "fhj/vec.hpp"

namespace fhj {

struct FieldMode {
  ChanVec amplitude;  // in R^m
  Point wavevector;   // in R^d
};

// Finite random-phase Fourier sum: a concrete stationary-ergodic field with
// exact C^1 evaluation and closed-form moments. Stationarity holds by
// construction once the phases are uniform on [0, 2*pi); ergodicity needs
// pairwise rationally independent wavevectors (validated with a warning).
struct FieldSpec {
  int dimension = 1;
  int channels = 1;
  std::vector<FieldMode> modes;
  double m0 = 4.0;          // a.s. bound for |f| + |Df|
  double kappa = 0.5;       // Holder exponent of Df, report-only
  bool nonconstant = false; // require a mode with nonzero wavevector

  // sum_j |a_j| and sum_j |a_j||k_j|
  double amplitude_sum() const {
    double s = 0.0;
    for (const auto& mo : modes) s += mo.amplitude.norm();
    return s;
  }
  double gradient_sum() const {
    double s = 0.0;
    for (const auto& mo : modes) s += mo.amplitude.norm() * mo.wavevector.norm();
    return s;
  }

  void validate() const;
  // warnings that do not block construction (e.g. rationally dependent
  // wavevectors, which break ergodicity but not stationarity)
  std::vector<std::string> validation_warnings() const;
};

class RandomField {
 public:
  RandomField() = default;
  RandomField(FieldSpec spec, std::vector<double> phases);

  const FieldSpec& spec() const { return spec_; }
  const std::vector<double>& phases() const { return phases_; }
  const Point& offset() const { return offset_; }
  int dim() const { return spec_.dimension; }
  int channels() const { return spec_.channels; }

  ChanVec value(const Point& x) const;
  ChanMat jacobian(const Point& x) const;

  // realizes tau_y: shifted.value(x) == value(x + y)
  RandomField shifted(const Point& y) const;

  // multiply every amplitude by a scalar (used by the eps^theta scalings)
  RandomField scaled_amplitudes(double factor) const;

 private:
  FieldSpec spec_;
  std::vector<double> phases_;  // one per mode, in [0, 2*pi)
  Point offset_;                // accumulated spatial shift
};

class BrownianPath {
 public:
  BrownianPath() = default;
  BrownianPath(double horizon, double dt, std::vector<ChanVec> values);

  double horizon() const { return horizon_; }
  double dt() const { return dt_; }
  int steps() const { return static_cast<int>(values_.size()) - 1; }
  int channels() const { return values_.empty() ? 0 : values_[0].dim(); }
  const std::vector<ChanVec>& values() const { return values_; }

  // linear interpolation off-grid; clamps to [0, horizon] within 1e-9
  ChanVec at(double t) const;
  bool on_grid(double t, double tol = 1e-9) const;

  // s -> B(t0 + s) - B(t0) on the remaining horizon; t0 must be on the grid
  BrownianPath shifted(double t0) const;

  // t -> sqrt(eps) * B(t / eps) on grid dt * eps
  BrownianPath rescaled(double eps) const;

 private:
  double horizon_ = 0.0;
  double dt_ = 0.0;
  std::vector<ChanVec> values_;  // values_[k] = B(k * dt), values_[0] = 0
};

struct RandomEnvironment {
  RandomField field;
  BrownianPath path;
  uint64_t seed = 0;
  int index = 0;
};

// Deterministic function of its arguments; field and path come from
// independent sub-streams of (master_seed, index).
RandomEnvironment sample_environment(const FieldSpec& spec, double horizon,
                                     double dt, uint64_t master_seed,
                                     int index);

// Brownian path alone (used where no field is involved, e.g. the psi oracle)
BrownianPath sample_brownian(int channels, double horizon, double dt,
                             uint64_t master_seed, int index);

// E|Df(0)|^2 in closed form: sum_j |a_j|^2 |k_j|^2 / 2
double grad_energy(const FieldSpec& spec);

}  // namespace fhj
