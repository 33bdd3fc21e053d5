#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fhj/env.hpp"
#include "fhj/rng.hpp"
#include "fhj/stats.hpp"

using namespace fhj;

namespace {

FieldSpec single_mode_spec(double amp = 1.0, double wave = 1.0) {
  FieldSpec spec;
  spec.dimension = 1;
  spec.channels = 1;
  spec.m0 = 4.0;
  FieldMode m;
  m.amplitude = ChanVec{amp};
  m.wavevector = Point{wave};
  spec.modes = {m};
  return spec;
}

FieldSpec two_mode_2d_spec() {
  FieldSpec spec;
  spec.dimension = 2;
  spec.channels = 2;
  spec.m0 = 8.0;
  FieldMode m1, m2;
  m1.amplitude = ChanVec{0.8, 0.3};
  m1.wavevector = Point{1.0, 0.5};
  m2.amplitude = ChanVec{0.4, 0.6};
  m2.wavevector = Point{-0.7, 1.3};
  spec.modes = {m1, m2};
  return spec;
}

}  // namespace

TEST_CASE("sampling is a deterministic function of (seed, index)") {
  auto spec = two_mode_2d_spec();
  auto a = sample_environment(spec, 2.0, 0.125, 42, 7);
  auto b = sample_environment(spec, 2.0, 0.125, 42, 7);
  REQUIRE(a.field.phases().size() == b.field.phases().size());
  for (std::size_t i = 0; i < a.field.phases().size(); ++i)
    CHECK(a.field.phases()[i] == b.field.phases()[i]);
  for (int k = 0; k <= a.path.steps(); ++k)
    for (int c = 0; c < a.path.channels(); ++c)
      CHECK(a.path.values()[k][c] == b.path.values()[k][c]);

  auto c = sample_environment(spec, 2.0, 0.125, 42, 8);
  bool all_same = true;
  for (std::size_t i = 0; i < a.field.phases().size(); ++i)
    all_same = all_same && a.field.phases()[i] == c.field.phases()[i];
  CHECK_FALSE(all_same);
}

TEST_CASE("zero modes give the zero field") {
  FieldSpec spec;
  spec.dimension = 2;
  spec.channels = 1;
  spec.m0 = 1.0;
  auto env = sample_environment(spec, 1.0, 0.25, 1, 0);
  Point x{0.3, -1.7};
  CHECK(env.field.value(x)[0] == 0.0);
  CHECK(env.field.jacobian(x).row[0][0] == 0.0);
  CHECK(env.field.jacobian(x).row[0][1] == 0.0);
}

TEST_CASE("ensemble mean of f(0) vanishes within 4 SE") {
  auto spec = single_mode_spec();
  RunningStats st;
  Point origin{0.0};
  for (int i = 0; i < 10000; ++i) {
    auto env = sample_environment(spec, 0.5, 0.25, 99, i);
    st.add(env.field.value(origin)[0]);
  }
  CHECK(std::abs(st.mean()) <= 4.0 * st.se());
}

TEST_CASE("single mode with zero phase at the origin") {
  auto spec = single_mode_spec();
  RandomField f(spec, {0.0});
  Point x{0.0};
  CHECK(f.value(x)[0] == doctest::Approx(1.0));
  CHECK(f.jacobian(x).row[0][0] == doctest::Approx(0.0));
}

TEST_CASE("analytic gradient matches central differences") {
  auto spec = two_mode_2d_spec();
  auto env = sample_environment(spec, 0.5, 0.25, 7, 3);
  CounterRng rng(7, "probe", 0);
  double step = 1e-4;
  for (int trial = 0; trial < 100; ++trial) {
    Point x{4.0 * rng.next_double() - 2.0, 4.0 * rng.next_double() - 2.0};
    auto J = env.field.jacobian(x);
    for (int axis = 0; axis < 2; ++axis) {
      Point xp = x, xm = x;
      xp[axis] += step;
      xm[axis] -= step;
      auto fp = env.field.value(xp);
      auto fm = env.field.value(xm);
      for (int ch = 0; ch < 2; ++ch) {
        double fd = (fp[ch] - fm[ch]) / (2.0 * step);
        CHECK(std::abs(J.row[ch][axis] - fd) < 1e-6);
      }
    }
  }
}

TEST_CASE("spatial shift realizes tau_y exactly") {
  auto spec = two_mode_2d_spec();
  auto env = sample_environment(spec, 0.5, 0.25, 11, 0);
  Point y{0.37, -1.29};
  auto shifted = env.field.shifted(y);
  CounterRng rng(11, "probe", 1);
  for (int trial = 0; trial < 20; ++trial) {
    Point x{4.0 * rng.next_double() - 2.0, 4.0 * rng.next_double() - 2.0};
    auto lhs = shifted.value(x);
    auto rhs = env.field.value(x + y);
    for (int ch = 0; ch < 2; ++ch) CHECK(lhs[ch] == rhs[ch]);
  }

  // shift by zero leaves evaluations unchanged
  auto zero_shift = env.field.shifted(Point{0.0, 0.0});
  Point probe{1.0, 2.0};
  CHECK(zero_shift.value(probe)[0] == env.field.value(probe)[0]);

  // group law: tau_{y1} then tau_{y2} equals tau_{y1 + y2}
  Point y1{0.5, 0.25}, y2{-1.25, 2.0};
  auto two_step = env.field.shifted(y2).shifted(y1);
  auto one_step = env.field.shifted(y1 + y2);
  for (int trial = 0; trial < 20; ++trial) {
    Point x{4.0 * rng.next_double() - 2.0, 4.0 * rng.next_double() - 2.0};
    CHECK(two_step.value(x)[0] == one_step.value(x)[0]);
    CHECK(two_step.value(x)[1] == one_step.value(x)[1]);
  }
}

TEST_CASE("time shift returns the incremental path") {
  auto path = sample_brownian(2, 4.0, 0.25, 5, 0);
  auto same = path.shifted(0.0);
  CHECK(same.horizon() == path.horizon());
  CHECK(same.values()[3][1] == path.values()[3][1]);

  double t0 = 1.25;
  auto sh = path.shifted(t0);
  CHECK(sh.horizon() == doctest::Approx(path.horizon() - t0));
  for (int k = 0; k <= sh.steps(); ++k) {
    double s = static_cast<double>(k) * 0.25;
    for (int c = 0; c < 2; ++c)
      CHECK(sh.values()[k][c] ==
            doctest::Approx(path.at(t0 + s)[c] - path.at(t0)[c]).epsilon(1e-12));
  }
  CHECK_THROWS(path.shifted(0.1));  // off the grid
}

TEST_CASE("Brownian rescaling") {
  auto path = sample_brownian(1, 8.0, 0.125, 13, 2);
  auto same = path.rescaled(1.0);
  CHECK(same.dt() == path.dt());
  CHECK(same.values()[5][0] == path.values()[5][0]);

  // variance of rescaled increments is the rescaled step within 4 SE
  RunningStats inc;
  for (int i = 0; i < 2000; ++i) {
    auto p = sample_brownian(1, 1.0, 0.25, 77, i).rescaled(0.25);
    for (int k = 0; k < p.steps(); ++k) {
      double d = p.values()[k + 1][0] - p.values()[k][0];
      inc.add(d * d);
    }
  }
  double dt_new = 0.25 * 0.25;
  CHECK(std::abs(inc.mean() - dt_new) <= 4.0 * inc.se());

  // rescaling twice composes multiplicatively
  auto twice = path.rescaled(0.5).rescaled(0.25);
  auto once = path.rescaled(0.125);
  CHECK(twice.dt() == doctest::Approx(once.dt()).epsilon(1e-15));
  for (int k = 0; k <= once.steps(); ++k)
    CHECK(twice.values()[k][0] ==
          doctest::Approx(once.values()[k][0]).epsilon(1e-14));
}

TEST_CASE("grad energy closed form and sampling oracle") {
  FieldSpec empty;
  empty.dimension = 1;
  empty.channels = 1;
  empty.m0 = 1.0;
  CHECK(grad_energy(empty) == 0.0);

  auto spec = single_mode_spec(1.0, 1.0);
  CHECK(grad_energy(spec) == doctest::Approx(0.5));

  // Monte Carlo over phase draws
  RunningStats st;
  Point origin{0.0};
  for (int i = 0; i < 100000; ++i) {
    CounterRng rng(31, "field-phase", static_cast<uint64_t>(i));
    RandomField f(spec, {rng.next_phase()});
    st.add(f.jacobian(origin).frobenius2());
  }
  CHECK(std::abs(st.mean() - 0.5) <= 4.0 * st.se());
}

TEST_CASE("path second moments match t") {
  double t = 0.75;
  RunningStats st;
  for (int i = 0; i < 10000; ++i) {
    auto p = sample_brownian(1, 1.0, 0.25, 1234, i);
    double b = p.at(t)[0];
    st.add(b * b);
  }
  CHECK(std::abs(st.mean() - t) <= 4.0 * st.se());
}

TEST_CASE("field is statistically stationary across shifts") {
  auto spec = single_mode_spec(0.9, 1.3);
  const int n = 4000;
  Point base{0.4};
  std::vector<double> shifts = {0.0, 0.7, -2.3, 5.1, 11.8};
  std::vector<RunningStats> first(shifts.size()), second(shifts.size());
  for (int i = 0; i < n; ++i) {
    auto env = sample_environment(spec, 0.5, 0.25, 555, i);
    for (std::size_t s = 0; s < shifts.size(); ++s) {
      double v = env.field.value(base + Point{shifts[s]})[0];
      first[s].add(v);
      second[s].add(v * v);
    }
  }
  for (std::size_t s = 1; s < shifts.size(); ++s) {
    double se1 = std::sqrt(first[0].se() * first[0].se() +
                           first[s].se() * first[s].se());
    double se2 = std::sqrt(second[0].se() * second[0].se() +
                           second[s].se() * second[s].se());
    CHECK(std::abs(first[s].mean() - first[0].mean()) <= 4.0 * se1);
    CHECK(std::abs(second[s].mean() - second[0].mean()) <= 4.0 * se2);
  }
}

TEST_CASE("parameter validation") {
  auto spec = single_mode_spec();
  CHECK_THROWS(sample_environment(spec, -1.0, 0.25, 0, 0));
  CHECK_THROWS(sample_environment(spec, 1.0, 0.0, 0, 0));
  CHECK_THROWS(sample_environment(spec, 1.0, 0.3, 0, 0));  // no divisibility

  FieldSpec overweight = spec;
  overweight.modes[0].amplitude = ChanVec{10.0};
  CHECK_THROWS(overweight.validate());

  FieldSpec flat = spec;
  flat.modes[0].wavevector = Point{0.0};
  flat.nonconstant = true;
  CHECK_THROWS(flat.validate());
}

TEST_CASE("rationally dependent wavevectors only warn") {
  FieldSpec spec;
  spec.dimension = 1;
  spec.channels = 1;
  spec.m0 = 4.0;
  FieldMode m1, m2;
  m1.amplitude = ChanVec{0.5};
  m1.wavevector = Point{1.0};
  m2.amplitude = ChanVec{0.5};
  m2.wavevector = Point{2.0};
  spec.modes = {m1, m2};
  CHECK_NOTHROW(spec.validate());
  CHECK_FALSE(spec.validation_warnings().empty());

  spec.modes[1].wavevector = Point{std::sqrt(2.0)};
  CHECK(spec.validation_warnings().empty());
}
