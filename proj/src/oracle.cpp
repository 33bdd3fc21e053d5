#include "fhj/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "fhj/parallel.hpp"
#include "fhj/stats.hpp"

namespace fhj {

void PsiFixture::validate() const {
  if (!(b > a)) throw std::invalid_argument("psi fixture needs b > a");
  if (path.channels() != 1)
    throw std::invalid_argument("psi fixture needs a scalar path");
  if (!path.on_grid(a) || !path.on_grid(b))
    throw std::invalid_argument("interval endpoints must be on the path grid");
  if (a < -1e-9 || b > path.horizon() + 1e-9)
    throw std::invalid_argument("path grid must cover [a, b]");
}

namespace {

struct GridRange {
  int ka = 0;
  int kb = 0;
  double dt = 0.0;
};

GridRange grid_range(const PsiFixture& fix) {
  GridRange g;
  g.dt = fix.path.dt();
  g.ka = static_cast<int>(std::llround(fix.a / g.dt));
  g.kb = static_cast<int>(std::llround(fix.b / g.dt));
  return g;
}

}  // namespace

double psi_value(const PsiFixture& fix) {
  fix.validate();
  auto g = grid_range(fix);
  const auto& vals = fix.path.values();
  double int_b = 0.0, int_b2 = 0.0;
  for (int k = g.ka; k < g.kb; ++k) {
    double b0 = vals[k][0], b1 = vals[k + 1][0];
    int_b += 0.5 * (b0 + b1) * g.dt;
    int_b2 += 0.5 * (b0 * b0 + b1 * b1) * g.dt;
  }
  double len = fix.b - fix.a;
  return 0.5 * (int_b * int_b / len - int_b2);
}

DiscretePath psi_minimizer(const PsiFixture& fix) {
  fix.validate();
  auto g = grid_range(fix);
  const auto& vals = fix.path.values();
  double int_b = 0.0;
  for (int k = g.ka; k < g.kb; ++k)
    int_b += 0.5 * (vals[k][0] + vals[k + 1][0]) * g.dt;
  double avg = int_b / (fix.b - fix.a);

  DiscretePath p;
  p.s = fix.a;
  p.t = fix.b;
  p.nodes.assign(static_cast<std::size_t>(g.kb - g.ka) + 1, Point(1));
  double acc = 0.0;
  p.nodes[0][0] = 0.0;
  for (int k = g.ka; k < g.kb; ++k) {
    acc += 0.5 * ((vals[k][0] - avg) + (vals[k + 1][0] - avg)) * g.dt;
    p.nodes[k - g.ka + 1][0] = acc;
  }
  return p;
}

PsiMeanStats psi_mean_stats(double T, double dt, int samples,
                            uint64_t master_seed, int workers) {
  std::vector<double> vals(static_cast<std::size_t>(samples));
  parallel_for(samples, workers, [&](int i) {
    PsiFixture fix;
    fix.a = 0.0;
    fix.b = T;
    fix.path = sample_brownian(1, T, dt, master_seed, i);
    vals[static_cast<std::size_t>(i)] = psi_value(fix) / T;
  });
  RunningStats st;
  for (double v : vals) st.add(v);
  PsiMeanStats out;
  out.mean = st.mean();
  out.se = st.se();
  out.samples = samples;
  return out;
}

double PsiDpReport::fraction_within(double rel_tol) const {
  int ok = 0, counted = 0;
  for (const auto& r : rows) {
    if (r.excluded) continue;
    ++counted;
    if (r.relative_error <= rel_tol) ++ok;
  }
  return counted > 0 ? static_cast<double>(ok) / counted : 0.0;
}

double PsiDpReport::fraction_path_within(double dist_tol) const {
  int ok = 0, counted = 0;
  for (const auto& r : rows) {
    if (r.excluded) continue;
    ++counted;
    if (r.path_distance <= dist_tol) ++ok;
  }
  return counted > 0 ? static_cast<double>(ok) / counted : 0.0;
}

PsiDpReport psi_vs_dp(double T, const LatticeSpec& lat, double path_dt,
                      int samples, uint64_t master_seed, int workers) {
  PowerLawHamiltonian H(2.0, 1.0);
  LinearField field;
  PsiDpReport rep;
  rep.rows.assign(static_cast<std::size_t>(samples), PsiDpRow{});
  parallel_for(samples, workers, [&](int i) {
    PsiDpRow row;
    row.realization = i;
    BrownianPath path = sample_brownian(1, T, path_dt, master_seed, i);
    PsiFixture fix;
    fix.a = 0.0;
    fix.b = T;
    fix.path = path;
    row.psi_closed_form = psi_value(fix);

    Point origin(1);
    auto est = dp_lagrangian_impl(origin, origin, 0.0, T, field, path, H, lat);
    est = descent_refine_impl(est, field, path, H, 200);
    row.dp_value = est.value;
    row.excluded = est.touched_boundary;
    row.relative_error = std::abs(est.value - row.psi_closed_form) /
                         std::max(1e-12, std::abs(row.psi_closed_form));

    // sup distance between the refined path and the closed-form minimizer,
    // compared on the DP node times
    DiscretePath star = psi_minimizer(fix);
    int stride = static_cast<int>(std::llround(lat.dt / path_dt));
    double dist = 0.0;
    for (int k = 0; k < static_cast<int>(est.minimizer.nodes.size()); ++k) {
      double ref = star.nodes[static_cast<std::size_t>(k) * stride][0];
      dist = std::max(dist, std::abs(est.minimizer.nodes[k][0] - ref));
    }
    row.path_distance = dist;
    rep.rows[static_cast<std::size_t>(i)] = row;
  });
  for (const auto& r : rep.rows)
    if (r.excluded) ++rep.excluded;
  return rep;
}

}  // namespace fhj
