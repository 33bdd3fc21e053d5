#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fhj/hamiltonian.hpp"
#include "fhj/rng.hpp"

using namespace fhj;

namespace {

// brute-force conjugate over a 1-d grid, the independent oracle for
// legendre_numeric and the closed forms
double brute_conjugate_1d(const PowerLawHamiltonian& H, double v, double lo,
                          double hi, int n) {
  double best = -1e300;
  for (int i = 0; i <= n; ++i) {
    double p = lo + (hi - lo) * static_cast<double>(i) / n;
    best = std::max(best, p * v - H.eval_H(Point{p}));
  }
  return best;
}

}  // namespace

TEST_CASE("quadratic Hamiltonian is self-dual") {
  PowerLawHamiltonian H(2.0, 1.0);
  Point p{3.0, 4.0};
  CHECK(H.eval_H(p) == doctest::Approx(12.5));
  CHECK(H.eval_H_star(p) == doctest::Approx(12.5));
}

TEST_CASE("quartic conjugate by hand") {
  PowerLawHamiltonian H(4.0, 1.0);
  CHECK(H.q_dual() == doctest::Approx(4.0 / 3.0));
  CHECK(H.eval_H_star(Point{1.0, 0.0}) == doctest::Approx(0.75));
}

TEST_CASE("closed-form conjugate matches the brute-force grid") {
  PowerLawHamiltonian H(3.0, 1.0);
  for (double v : {0.25, 1.0, 2.5}) {
    double numeric = brute_conjugate_1d(H, v, -8.0, 8.0, 160000);
    CHECK(H.eval_H_star(Point{v}) == doctest::Approx(numeric).epsilon(1e-6));
  }
  // nonunit scale
  PowerLawHamiltonian Hc(2.5, 1.7);
  for (double v : {0.5, 1.5}) {
    double numeric = brute_conjugate_1d(Hc, v, -8.0, 8.0, 160000);
    CHECK(Hc.eval_H_star(Point{v}) == doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("discrete Legendre transform of the quadratic") {
  std::vector<Point> grid;
  std::vector<double> vals;
  for (double a = -5.0; a <= 5.0 + 1e-9; a += 0.05)
    for (double b = -5.0; b <= 5.0 + 1e-9; b += 0.05) {
      Point v{a, b};
      grid.push_back(v);
      vals.push_back(0.5 * v.norm2());
    }
  auto out = legendre_numeric(grid, vals, Point{1.0, 0.0});
  CHECK(std::abs(out.value - 0.5) < 0.003);
  CHECK_FALSE(out.boundary_suspect);
}

TEST_CASE("conjugating H* recovers H within grid tolerance") {
  PowerLawHamiltonian H(3.0, 1.0);
  double radius = legendre_grid_radius(2.0, H.growth_constant(), H.q_dual());
  std::vector<Point> grid;
  std::vector<double> vals;
  for (double v = -radius; v <= radius + 1e-9; v += 0.01) {
    grid.push_back(Point{v});
    vals.push_back(H.eval_H_star(Point{v}));
  }
  for (double p = -2.0; p <= 2.0 + 1e-9; p += 0.25) {
    auto out = legendre_numeric(grid, vals, Point{p});
    CHECK(std::abs(out.value - H.eval_H(Point{p})) < 1e-2);
    CHECK_FALSE(out.boundary_suspect);
  }
}

TEST_CASE("double conjugation returns a convex sample") {
  PowerLawHamiltonian H(2.0, 1.0);
  std::vector<Point> vgrid, pgrid;
  std::vector<double> vvals, pvals;
  for (double v = -6.0; v <= 6.0 + 1e-9; v += 0.02) {
    vgrid.push_back(Point{v});
    vvals.push_back(H.eval_H_star(Point{v}));
  }
  for (double p = -6.0; p <= 6.0 + 1e-9; p += 0.02) {
    pgrid.push_back(Point{p});
    pvals.push_back(legendre_numeric(vgrid, vvals, Point{p}).value);
  }
  for (double v = -1.5; v <= 1.5 + 1e-9; v += 0.3) {
    double back = legendre_numeric(pgrid, pvals, Point{v}).value;
    CHECK(std::abs(back - H.eval_H_star(Point{v})) < 1e-2);
  }
}

TEST_CASE("subgradient maps") {
  PowerLawHamiltonian H2(2.0, 1.0);
  Point v{0.7, -1.1};
  CHECK((H2.map_p(v) - v).norm() == doctest::Approx(0.0));
  CHECK((H2.map_v(v) - v).norm() == doctest::Approx(0.0));

  PowerLawHamiltonian H3(3.0, 1.0);
  Point res = H3.map_v(Point{2.0, 0.0});
  CHECK(res[0] == doctest::Approx(4.0));
  CHECK(res[1] == doctest::Approx(0.0));

  CHECK(H3.map_p(Point{0.0, 0.0}).norm() == 0.0);
  CHECK(H3.map_v(Point{0.0, 0.0}).norm() == 0.0);

  CounterRng rng(3, "roundtrip", 0);
  for (int i = 0; i < 100; ++i) {
    Point p{4.0 * rng.next_double() - 2.0, 4.0 * rng.next_double() - 2.0};
    if (p.norm() < 1e-3) continue;
    Point back = H3.map_p(H3.map_v(p));
    CHECK((back - p).norm() < 1e-10);
  }
  // scale also round-trips
  PowerLawHamiltonian Hc(2.5, 0.6);
  Point p{1.3, -0.4};
  CHECK((Hc.map_p(Hc.map_v(p)) - p).norm() < 1e-10);
}

TEST_CASE("growth functional G") {
  PowerLawHamiltonian H2(2.0, 1.0);
  // quadratic remainder is |z|^2 / 2, so G = 1/2 everywhere
  CHECK(H2.growth_G(Point{0.0, 0.0}) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(H2.growth_G(Point{3.0, -1.0}) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(H2.growth_G(Point{1.7}) == doctest::Approx(0.5).epsilon(1e-3));

  // shape of the section 5 bound G(v) <= C (1 + |v|)^{q'-2} for q' >= 2
  PowerLawHamiltonian H15(1.5, 1.0);  // q' = 3
  double qd = H15.q_dual();
  double worst_ratio = 0.0;
  for (double v = 0.0; v <= 4.0 + 1e-9; v += 0.5) {
    double ratio = H15.growth_G(Point{v}) / std::pow(1.0 + v, qd - 2.0);
    worst_ratio = std::max(worst_ratio, ratio);
  }
  CHECK(worst_ratio < 10.0);
  // nonnegativity and the dual-growth cap
  for (double v = 0.0; v <= 4.0 + 1e-9; v += 0.5) {
    double g = H15.growth_G(Point{v});
    CHECK(g >= 0.0);
    CHECK(g <= 10.0 * (1.0 + std::pow(v, qd - 1.0)));
  }
}

TEST_CASE("Fenchel-Young inequality with equality at the subgradient") {
  PowerLawHamiltonian H(3.0, 1.4);
  CounterRng rng(17, "fy", 0);
  for (int i = 0; i < 1000; ++i) {
    Point p{6.0 * rng.next_double() - 3.0, 6.0 * rng.next_double() - 3.0};
    Point v{6.0 * rng.next_double() - 3.0, 6.0 * rng.next_double() - 3.0};
    CHECK(p.dot(v) <= H.eval_H(p) + H.eval_H_star(v) + 1e-12);
    Point vstar = H.map_v(p);
    double slack = H.eval_H(p) + H.eval_H_star(vstar) - p.dot(vstar);
    CHECK(std::abs(slack) < 1e-10);
  }
}

TEST_CASE("midpoint convexity of H and H*") {
  PowerLawHamiltonian H(2.7, 0.8);
  CounterRng rng(23, "cvx", 0);
  for (int i = 0; i < 1000; ++i) {
    Point a{8.0 * rng.next_double() - 4.0, 8.0 * rng.next_double() - 4.0};
    Point b{8.0 * rng.next_double() - 4.0, 8.0 * rng.next_double() - 4.0};
    Point mid = 0.5 * (a + b);
    CHECK(H.eval_H(mid) <= 0.5 * (H.eval_H(a) + H.eval_H(b)) + 1e-12);
    CHECK(H.eval_H_star(mid) <=
          0.5 * (H.eval_H_star(a) + H.eval_H_star(b)) + 1e-12);
  }
}

TEST_CASE("discrete conjugate is antitone in the sampled values") {
  std::vector<Point> grid;
  std::vector<double> lo_vals, hi_vals;
  for (double v = -3.0; v <= 3.0 + 1e-9; v += 0.1) {
    grid.push_back(Point{v});
    lo_vals.push_back(0.5 * v * v);
    hi_vals.push_back(0.5 * v * v + 0.2 + 0.1 * std::sin(3.0 * v));
  }
  for (double p = -1.5; p <= 1.5 + 1e-9; p += 0.5) {
    double clo = legendre_numeric(grid, lo_vals, Point{p}).value;
    double chi = legendre_numeric(grid, hi_vals, Point{p}).value;
    CHECK(chi <= clo);
  }
}

TEST_CASE("boundary-attained supremum is flagged") {
  std::vector<Point> grid;
  std::vector<double> vals;
  for (double v = -1.0; v <= 1.0 + 1e-9; v += 0.1) {
    grid.push_back(Point{v});
    vals.push_back(0.5 * v * v);
  }
  // maximizer of 5v - v^2/2 sits far outside [-1, 1]
  CHECK(legendre_numeric(grid, vals, Point{5.0}).boundary_suspect);
  CHECK_FALSE(legendre_numeric(grid, vals, Point{0.2}).boundary_suspect);
}

TEST_CASE("dual growth envelope and the H* difference bound") {
  PowerLawHamiltonian H(3.0, 1.4);
  double qd = H.q_dual();
  double C = std::max(std::pow(H.scale(), 1.0 - qd),
                      std::pow(H.scale(), qd - 1.0)) + 1.0;
  CounterRng rng(41, "dual", 0);
  for (int i = 0; i < 500; ++i) {
    Point v1{8.0 * rng.next_double() - 4.0, 8.0 * rng.next_double() - 4.0};
    Point v2{8.0 * rng.next_double() - 4.0, 8.0 * rng.next_double() - 4.0};
    double h1 = H.eval_H_star(v1);
    double vq = std::pow(v1.norm(), qd);
    CHECK(h1 >= vq / C - C);
    CHECK(h1 <= C * (vq + 1.0));
    double lip = C * (1.0 + std::pow(v1.norm(), qd - 1.0) +
                      std::pow(v2.norm(), qd - 1.0)) * (v1 - v2).norm();
    CHECK(std::abs(h1 - H.eval_H_star(v2)) <= lip + 1e-12);
  }
}

TEST_CASE("growth envelope constants") {
  PowerLawHamiltonian H(2.0, 1.0);
  double C = H.growth_constant();
  for (double p = -4.0; p <= 4.0 + 1e-9; p += 0.25) {
    double hp = H.eval_H(Point{p});
    double pq = std::pow(std::abs(p), H.q());
    CHECK(hp >= pq / C - C);
    CHECK(hp <= C * (pq + 1.0));
  }
  CHECK_THROWS(PowerLawHamiltonian(1.0, 1.0));
  CHECK_THROWS(PowerLawHamiltonian(2.0, -1.0));
}
