#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fhj/oracle.hpp"
#include "fhj/stats.hpp"

using namespace fhj;

namespace {

BrownianPath path_from(double horizon, double dt,
                       const std::vector<double>& xs) {
  std::vector<ChanVec> vals;
  vals.reserve(xs.size());
  for (double x : xs) vals.push_back(ChanVec{x});
  return BrownianPath(horizon, dt, std::move(vals));
}

BrownianPath zero_path(double horizon, double dt) {
  int n = static_cast<int>(std::llround(horizon / dt));
  return path_from(horizon, dt, std::vector<double>(n + 1, 0.0));
}

BrownianPath linear_path(double horizon, double dt) {
  int n = static_cast<int>(std::llround(horizon / dt));
  std::vector<double> xs(n + 1);
  for (int k = 0; k <= n; ++k) xs[k] = dt * static_cast<double>(k);
  return path_from(horizon, dt, xs);
}

}  // namespace

TEST_CASE("degenerate zero path") {
  PsiFixture fix;
  fix.path = zero_path(1.0, 1.0 / 512.0);
  CHECK(psi_value(fix) == 0.0);
  auto star = psi_minimizer(fix);
  for (const auto& nd : star.nodes) CHECK(nd[0] == 0.0);
}

TEST_CASE("linear test path integrates by hand") {
  PsiFixture fix;
  fix.path = linear_path(1.0, 1.0 / 512.0);
  // psi = ((int t)^2 - int t^2) / 2 = (1/4 - 1/3) / 2 = -1/24
  CHECK(psi_value(fix) == doctest::Approx(-1.0 / 24.0).epsilon(1e-4));
}

TEST_CASE("Monte Carlo mean of (1/T) psi matches -T/12") {
  for (double T : {1.0, 2.0}) {
    auto st = psi_mean_stats(T, T / 512.0, 8000, 2026);
    CHECK(std::abs(st.mean - (-T / 12.0)) <= 3.0 * st.se + 1e-3);
  }
}

TEST_CASE("closed-form minimizer starts and ends at zero") {
  for (int i = 0; i < 20; ++i) {
    PsiFixture fix;
    fix.path = sample_brownian(1, 1.0, 1.0 / 512.0, 31, i);
    auto star = psi_minimizer(fix);
    CHECK(std::abs(star.nodes.front()[0]) < 1e-8);
    CHECK(std::abs(star.nodes.back()[0]) < 1e-8);
  }
}

TEST_CASE("action of the closed-form minimizer reproduces psi") {
  PowerLawHamiltonian H(2.0, 1.0);
  LinearField field;
  for (int i = 0; i < 10; ++i) {
    PsiFixture fix;
    fix.path = sample_brownian(1, 1.0, 1.0 / 512.0, 47, i);
    auto star = psi_minimizer(fix);
    double action = total_action(star, field, fix.path, H, 4).total;
    CHECK(std::abs(action - psi_value(fix)) < 1e-3);
  }
}

TEST_CASE("psi is nonpositive and beats the zero path") {
  for (int i = 0; i < 100; ++i) {
    PsiFixture fix;
    fix.path = sample_brownian(1, 1.0, 1.0 / 256.0, 53, i);
    double v = psi_value(fix);
    CHECK(v <= 1e-9);  // zero path has zero action; Cauchy-Schwarz closed form
  }
}

TEST_CASE("psi is quadratic under path scaling") {
  auto base = sample_brownian(1, 1.0, 1.0 / 256.0, 61, 0);
  PsiFixture fix;
  fix.path = base;
  double v1 = psi_value(fix);

  std::vector<double> scaled(base.values().size());
  for (std::size_t k = 0; k < scaled.size(); ++k)
    scaled[k] = 3.0 * base.values()[k][0];
  fix.path = path_from(1.0, 1.0 / 256.0, scaled);
  CHECK(psi_value(fix) == doctest::Approx(9.0 * v1).epsilon(1e-12));
}

TEST_CASE("optimizer reproduces the closed form on a few realizations") {
  LatticeSpec lat;
  lat.box = Box{Point{-3.0}, Point{3.0}};
  lat.h = 1.0 / 64.0;
  lat.dt = 1.0 / 128.0;
  lat.vmax = 8.0;
  lat.subsamples = 4;
  auto rep = psi_vs_dp(1.0, lat, 1.0 / 512.0, 6, 2027);
  REQUIRE(rep.rows.size() == 6);
  CHECK(rep.fraction_within(0.05) >= 5.0 / 6.0);
  // refined path tracks the closed-form minimizer
  CHECK(rep.fraction_path_within(0.05) >= 5.0 / 6.0);
  for (const auto& r : rep.rows) {
    CHECK(r.dp_value <= 1e-9);  // candidate class contains the zero path
  }
}

TEST_CASE("fixture validation") {
  PsiFixture fix;
  fix.path = zero_path(1.0, 0.25);
  fix.a = 0.1;  // off grid
  CHECK_THROWS(psi_value(fix));
  fix.a = 0.0;
  fix.b = 2.0;  // beyond horizon
  CHECK_THROWS(psi_value(fix));
}
