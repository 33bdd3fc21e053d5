#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fhj/action.hpp"
#include "fhj/env.hpp"
#include "fhj/rng.hpp"
#include "fhj/stats.hpp"

using namespace fhj;

namespace {

FieldSpec single_mode() {
  FieldSpec spec;
  spec.dimension = 1;
  spec.channels = 1;
  spec.m0 = 4.0;
  FieldMode m;
  m.amplitude = ChanVec{0.8};
  m.wavevector = Point{1.3};
  spec.modes = {m};
  return spec;
}

FieldSpec constant_field(double c) {
  FieldSpec spec;
  spec.dimension = 1;
  spec.channels = 1;
  spec.m0 = std::abs(c) + 1.0;
  FieldMode m;
  m.amplitude = ChanVec{c};
  m.wavevector = Point{0.0};
  spec.modes = {m};
  return spec;
}

// Classical integral int f(gamma_r) Bdot_r dr with Bdot piecewise constant
// on the Brownian grid, resolved by dense Simpson quadrature per grid cell.
// Independent of the integration-by-parts route.
double direct_quadrature(const DiscretePath& path, const RandomField& field,
                         const BrownianPath& B) {
  double dtb = B.dt();
  int k0 = static_cast<int>(std::llround(path.s / dtb));
  int k1 = static_cast<int>(std::llround(path.t / dtb));
  auto gamma_at = [&](double r) {
    double u = (r - path.s) / path.dt();
    int seg = std::min(static_cast<int>(std::floor(u)), path.segments() - 1);
    double w = u - seg;
    return path.nodes[seg] * (1.0 - w) + path.nodes[seg + 1] * w;
  };
  double total = 0.0;
  const int n = 64;  // Simpson panels per Brownian cell
  for (int k = k0; k < k1; ++k) {
    ChanVec db = B.values()[k + 1] - B.values()[k];
    double a = static_cast<double>(k) * dtb;
    double sum = 0.0;
    for (int i = 0; i <= 2 * n; ++i) {
      double r = a + dtb * static_cast<double>(i) / (2.0 * n);
      double w = (i == 0 || i == 2 * n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      sum += w * field.value(gamma_at(r)).dot(db);
    }
    total += sum * (dtb / (6.0 * n)) / dtb;
  }
  return total;
}

}  // namespace

TEST_CASE("kinetic action closed forms") {
  PowerLawHamiltonian H(2.0, 1.0);
  DiscretePath constant = DiscretePath::straight(Point{0.7}, Point{0.7}, 0.0,
                                                 2.0, 8);
  CHECK(kinetic_action(constant, H) == doctest::Approx(0.0));

  Point x{-0.5}, y{1.5};
  for (int K : {1, 4, 16}) {
    DiscretePath line = DiscretePath::straight(x, y, 0.0, 1.0, K);
    CHECK(kinetic_action(line, H) == doctest::Approx(2.0).epsilon(1e-12));
  }

  // refinement leaves the value stable at summation accuracy
  DiscretePath a = DiscretePath::straight(x, y, 0.0, 1.0, 32);
  DiscretePath b = DiscretePath::straight(x, y, 0.0, 1.0, 64);
  CHECK(std::abs(kinetic_action(a, H) - kinetic_action(b, H)) < 1e-12);
}

TEST_CASE("forcing vanishes for the zero field") {
  FieldSpec zero;
  zero.dimension = 1;
  zero.channels = 1;
  zero.m0 = 1.0;
  auto env = sample_environment(zero, 1.0, 0.0625, 3, 0);
  DiscretePath path = DiscretePath::straight(Point{0.0}, Point{1.0}, 0.0, 1.0,
                                             8);
  CHECK(forcing_integral(path, env, 4) == 0.0);
}

TEST_CASE("constant field reduces to the Brownian increment") {
  auto env = sample_environment(constant_field(1.7), 2.0, 0.0625, 5, 1);
  DiscretePath path = DiscretePath::straight(Point{-0.3}, Point{0.9}, 0.25,
                                             1.75, 12);
  // the sampled field is spatially constant at value c cos(phase)
  double cval = env.field.value(Point{0.0})[0];
  CHECK(cval == env.field.value(Point{2.7})[0]);
  double expected = cval * (env.path.at(1.75)[0] - env.path.at(0.25)[0]);
  CHECK(forcing_integral(path, env, 4) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("integration by parts agrees with direct quadrature at order 2") {
  auto env = sample_environment(single_mode(), 1.0, 0.0625, 9, 4);
  CounterRng rng(9, "path", 0);
  DiscretePath path;
  path.s = 0.0;
  path.t = 1.0;
  path.nodes.resize(9, Point(1));
  for (auto& nd : path.nodes) nd[0] = 2.0 * rng.next_double() - 1.0;

  double reference = direct_quadrature(path, env.field, env.path);
  std::vector<double> errs;
  for (int sub : {2, 4, 8}) {
    errs.push_back(std::abs(forcing_integral(path, env, sub) - reference));
  }
  // ~4x error reduction per doubling of the quadrature
  CHECK(errs[0] / errs[1] > 2.5);
  CHECK(errs[0] / errs[1] < 6.5);
  CHECK(errs[1] / errs[2] > 2.5);
  CHECK(errs[1] / errs[2] < 6.5);
}

TEST_CASE("quadrature error decays at order >= 1.9 against a fine reference") {
  auto env = sample_environment(single_mode(), 1.0, 0.0625, 21, 0);
  CounterRng rng(21, "path", 1);
  DiscretePath path;
  path.s = 0.0;
  path.t = 1.0;
  path.nodes.resize(17, Point(1));
  for (auto& nd : path.nodes) nd[0] = 2.0 * rng.next_double() - 1.0;

  double reference = forcing_integral(path, env, 64);
  std::vector<double> subs = {2, 4, 8, 16};
  std::vector<double> errs;
  for (double sub : subs)
    errs.push_back(std::abs(
        forcing_integral(path, env, static_cast<int>(sub)) - reference));
  CHECK(loglog_slope(subs, errs) <= -1.9);
}

TEST_CASE("total action composes kinetic and forcing") {
  PowerLawHamiltonian H(2.0, 1.0);
  FieldSpec zero;
  zero.dimension = 1;
  zero.channels = 1;
  zero.m0 = 1.0;
  auto env0 = sample_environment(zero, 1.0, 0.0625, 7, 0);
  DiscretePath line = DiscretePath::straight(Point{0.0}, Point{1.0}, 0.0, 1.0,
                                             8);
  auto bd = total_action(line, env0, H, 4);
  CHECK(bd.forcing == 0.0);
  CHECK(bd.total == bd.kinetic);

  // constant path: T H*(0) + f(x) . B(T)
  auto env = sample_environment(single_mode(), 2.0, 0.0625, 7, 1);
  Point x{0.4};
  DiscretePath rest = DiscretePath::straight(x, x, 0.0, 2.0, 16);
  auto bd2 = total_action(rest, env, H, 4);
  double expected = env.field.value(x).dot(env.path.at(2.0));
  CHECK(bd2.kinetic == doctest::Approx(0.0));
  CHECK(bd2.total == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("action is additive over subintervals") {
  PowerLawHamiltonian H(2.0, 1.0);
  auto env = sample_environment(single_mode(), 1.0, 0.0625, 13, 2);
  CounterRng rng(13, "path", 0);
  DiscretePath path;
  path.s = 0.0;
  path.t = 1.0;
  path.nodes.resize(9, Point(1));
  for (auto& nd : path.nodes) nd[0] = rng.next_double();

  DiscretePath left, right;
  left.s = 0.0;
  left.t = 0.5;
  left.nodes.assign(path.nodes.begin(), path.nodes.begin() + 5);
  right.s = 0.5;
  right.t = 1.0;
  right.nodes.assign(path.nodes.begin() + 4, path.nodes.end());

  double whole = total_action(path, env, H, 4).total;
  double split = total_action(left, env, H, 4).total +
                 total_action(right, env, H, 4).total;
  CHECK(whole == doctest::Approx(split).epsilon(1e-9));
}

TEST_CASE("shift covariance of the action") {
  PowerLawHamiltonian H(2.0, 1.0);
  auto env = sample_environment(single_mode(), 2.0, 0.0625, 17, 3);
  CounterRng rng(17, "path", 0);

  DiscretePath path;
  path.s = 0.5;
  path.t = 1.5;
  path.nodes.resize(9, Point(1));
  for (auto& nd : path.nodes) nd[0] = rng.next_double() + 0.7;

  Point z{0.7};
  double q = 0.5;
  RandomEnvironment shifted_env;
  shifted_env.field = env.field.shifted(z);
  shifted_env.path = env.path.shifted(q);

  DiscretePath moved = path;
  moved.s = path.s - q;
  moved.t = path.t - q;
  for (auto& nd : moved.nodes) nd -= z;

  double lhs = total_action(path, env, H, 4).total;
  double rhs = total_action(moved, shifted_env, H, 4).total;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
}

TEST_CASE("grid alignment is enforced") {
  auto env = sample_environment(single_mode(), 1.0, 0.0625, 1, 0);
  DiscretePath bad;
  bad.s = 0.0;
  bad.t = 1.0;
  bad.nodes.resize(7, Point(1));  // dt = 1/6, not a multiple of 1/16
  CHECK_THROWS(forcing_integral(bad, env, 4));

  DiscretePath off = DiscretePath::straight(Point{0.0}, Point{1.0}, 0.0625,
                                            0.5625, 4);
  CHECK_NOTHROW(forcing_integral(off, env, 4));  // on-grid start is fine
  DiscretePath late = DiscretePath::straight(Point{0.0}, Point{1.0}, 0.5, 1.5,
                                             4);
  CHECK_THROWS(forcing_integral(late, env, 4));  // leaves the horizon

  DiscretePath ok = DiscretePath::straight(Point{0.0}, Point{1.0}, 0.0, 1.0,
                                           8);
  CHECK_THROWS(forcing_integral(ok, env, 0));  // subsamples >= 1
}
