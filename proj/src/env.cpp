#include "fhj/env.hpp"

#include <cmath>

namespace fhj {

void FieldSpec::validate() const {
  if (dimension < 1 || dimension > kMaxDim)
    throw std::invalid_argument("field dimension must be in [1, " +
                                std::to_string(kMaxDim) + "]");
  if (channels < 1 || channels > kMaxChan)
    throw std::invalid_argument("field channels must be in [1, " +
                                std::to_string(kMaxChan) + "]");
  if (m0 <= 0.0) throw std::invalid_argument("m0 must be positive");
  for (const auto& mo : modes) {
    if (mo.amplitude.dim() != channels)
      throw std::invalid_argument("mode amplitude has wrong channel count");
    if (mo.wavevector.dim() != dimension)
      throw std::invalid_argument("mode wavevector has wrong dimension");
  }
  if (amplitude_sum() > m0 || gradient_sum() > m0)
    throw std::invalid_argument(
        "field exceeds the C^1 budget: need sum|a| <= m0 and sum|a||k| <= m0");
  if (nonconstant) {
    bool ok = false;
    for (const auto& mo : modes)
      if (mo.wavevector.norm() > 0.0 && mo.amplitude.norm() > 0.0) ok = true;
    if (!ok)
      throw std::invalid_argument(
          "spec flagged nonconstant but every mode has zero wavevector");
  }
}

std::vector<std::string> FieldSpec::validation_warnings() const {
  std::vector<std::string> warnings;
  // Ergodicity needs pairwise rationally independent wavevectors. Check
  // scalar ratios against small-denominator rationals.
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      double ni = modes[i].wavevector.norm();
      double nj = modes[j].wavevector.norm();
      if (ni == 0.0 || nj == 0.0) continue;
      // only meaningful for parallel wavevectors
      double cosang =
          modes[i].wavevector.dot(modes[j].wavevector) / (ni * nj);
      if (std::abs(std::abs(cosang) - 1.0) > 1e-12) continue;
      double ratio = ni / nj;
      for (int den = 1; den <= 8; ++den) {
        double num = ratio * den;
        if (std::abs(num - std::round(num)) < 1e-9) {
          warnings.push_back(
              "modes " + std::to_string(i) + " and " + std::to_string(j) +
              " have rationally dependent wavevectors; the single-realization "
              "field is periodic rather than ergodic");
          den = 9;
        }
      }
    }
  }
  return warnings;
}

RandomField::RandomField(FieldSpec spec, std::vector<double> phases)
    : spec_(std::move(spec)), phases_(std::move(phases)),
      offset_(Point(spec_.dimension)) {
  spec_.validate();
  if (phases_.size() != spec_.modes.size())
    throw std::invalid_argument("one phase per mode required");
}

ChanVec RandomField::value(const Point& x) const {
  Point u = x + offset_;
  ChanVec out(spec_.channels);
  for (std::size_t j = 0; j < spec_.modes.size(); ++j) {
    const auto& mo = spec_.modes[j];
    double c = std::cos(mo.wavevector.dot(u) + phases_[j]);
    for (int i = 0; i < spec_.channels; ++i) out[i] += mo.amplitude[i] * c;
  }
  return out;
}

ChanMat RandomField::jacobian(const Point& x) const {
  Point u = x + offset_;
  ChanMat out(spec_.channels, spec_.dimension);
  for (std::size_t j = 0; j < spec_.modes.size(); ++j) {
    const auto& mo = spec_.modes[j];
    double s = std::sin(mo.wavevector.dot(u) + phases_[j]);
    for (int i = 0; i < spec_.channels; ++i)
      for (int a = 0; a < spec_.dimension; ++a)
        out.row[i][a] -= mo.amplitude[i] * s * mo.wavevector[a];
  }
  return out;
}

RandomField RandomField::shifted(const Point& y) const {
  if (y.dim() != spec_.dimension)
    throw std::invalid_argument("shift dimension mismatch");
  RandomField out = *this;
  out.offset_ += y;
  return out;
}

RandomField RandomField::scaled_amplitudes(double factor) const {
  RandomField out = *this;
  for (auto& mo : out.spec_.modes) mo.amplitude *= factor;
  // keep the C^1 budget consistent with the rescaled amplitudes
  out.spec_.m0 = std::max(out.spec_.m0 * std::abs(factor), 1e-12);
  return out;
}

BrownianPath::BrownianPath(double horizon, double dt,
                           std::vector<ChanVec> values)
    : horizon_(horizon), dt_(dt), values_(std::move(values)) {
  if (horizon <= 0.0 || dt <= 0.0)
    throw std::invalid_argument("horizon and dt must be positive");
  if (values_.size() < 2)
    throw std::invalid_argument("path needs at least two samples");
}

bool BrownianPath::on_grid(double t, double tol) const {
  return nearly_integer(t / dt_, tol);
}

ChanVec BrownianPath::at(double t) const {
  double s = t / dt_;
  if (s < -1e-9 || s > static_cast<double>(steps()) + 1e-9)
    throw std::out_of_range("path evaluation outside sampled horizon");
  if (s < 0.0) s = 0.0;
  int k = static_cast<int>(std::floor(s));
  if (k >= steps()) return values_.back();
  double w = s - static_cast<double>(k);
  if (w == 0.0) return values_[k];
  return values_[k] * (1.0 - w) + values_[k + 1] * w;
}

BrownianPath BrownianPath::shifted(double t0) const {
  double s = t0 / dt_;
  if (!nearly_integer(s))
    throw std::invalid_argument("shift time must be on the path grid");
  int k0 = static_cast<int>(std::llround(s));
  if (k0 < 0 || k0 >= steps())
    throw std::invalid_argument("shift time outside horizon");
  std::vector<ChanVec> vals(values_.begin() + k0, values_.end());
  ChanVec base = vals[0];
  for (auto& v : vals) v -= base;
  return BrownianPath(horizon_ - static_cast<double>(k0) * dt_, dt_,
                      std::move(vals));
}

BrownianPath BrownianPath::rescaled(double eps) const {
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
  double root = std::sqrt(eps);
  std::vector<ChanVec> vals = values_;
  for (auto& v : vals) v *= root;
  return BrownianPath(horizon_ * eps, dt_ * eps, std::move(vals));
}

RandomEnvironment sample_environment(const FieldSpec& spec, double horizon,
                                     double dt, uint64_t master_seed,
                                     int index) {
  spec.validate();
  if (horizon <= 0.0 || dt <= 0.0)
    throw std::invalid_argument("horizon and dt must be positive");
  if (!nearly_integer(horizon / dt))
    throw std::invalid_argument("dt must divide the horizon");

  CounterRng phase_rng(master_seed, "field-phase", static_cast<uint64_t>(index));
  std::vector<double> phases(spec.modes.size());
  for (auto& p : phases) p = phase_rng.next_phase();

  RandomEnvironment env;
  env.field = RandomField(spec, std::move(phases));
  env.path = sample_brownian(spec.channels, horizon, dt, master_seed, index);
  env.seed = master_seed;
  env.index = index;
  return env;
}

BrownianPath sample_brownian(int channels, double horizon, double dt,
                             uint64_t master_seed, int index) {
  if (horizon <= 0.0 || dt <= 0.0)
    throw std::invalid_argument("horizon and dt must be positive");
  if (!nearly_integer(horizon / dt))
    throw std::invalid_argument("dt must divide the horizon");
  int steps = static_cast<int>(std::llround(horizon / dt));
  CounterRng rng(master_seed, "brownian", static_cast<uint64_t>(index));
  std::vector<ChanVec> vals(static_cast<std::size_t>(steps) + 1,
                            ChanVec(channels));
  double root_dt = std::sqrt(dt);
  for (int k = 1; k <= steps; ++k) {
    for (int i = 0; i < channels; ++i)
      vals[k][i] = vals[k - 1][i] + root_dt * rng.next_gaussian();
  }
  return BrownianPath(horizon, dt, std::move(vals));
}

double grad_energy(const FieldSpec& spec) {
  double s = 0.0;
  for (const auto& mo : spec.modes)
    s += 0.5 * mo.amplitude.norm2() * mo.wavevector.norm2();
  return s;
}

}  // namespace fhj
