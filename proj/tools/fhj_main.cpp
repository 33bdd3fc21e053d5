// Experiment driver: config ingestion, seeded reproducible runs, subcommand
// dispatch, CSV + JSON report emission.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fhj/config.hpp"
#include "fhj/env.hpp"
#include "fhj/hamiltonian.hpp"
#include "fhj/hj.hpp"
#include "fhj/homog.hpp"
#include "fhj/oracle.hpp"
#include "fhj/optimizer.hpp"
#include "fhj/report.hpp"
#include "fhj/rng.hpp"
#include "fhj/stats.hpp"

namespace fs = std::filesystem;
using namespace fhj;

namespace {

struct RunContext {
  ExperimentConfig cfg;
  fs::path out_dir;
  RunReport report;
  std::chrono::steady_clock::time_point started;

  fs::path emit(const CsvWriter& csv, const std::string& name) {
    fs::path p = out_dir / name;
    csv.write(p);
    report.outputs.push_back(p.string());
    return p;
  }
  void finish(const std::string& subcommand) {
    report.subcommand = subcommand;
    report.config_echo = cfg.to_json();
    report.seed = cfg.seed;
    report.version = build_version();
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    report.write(out_dir / (subcommand + "_report.json"));
  }
};

std::vector<std::string> point_cells(const Point& p) {
  std::vector<std::string> out;
  for (int j = 0; j < p.dim(); ++j) out.push_back(format_double(p[j]));
  return out;
}

int run_sample_env(RunContext& ctx, int samples) {
  const auto& cfg = ctx.cfg;
  for (const auto& w : cfg.field.validation_warnings())
    ctx.report.warnings.push_back(w);
  CsvWriter csv({"index", "f0", "grad_energy_sample", "B_end"});
  double horizon = 1.0;
  for (int i = 0; i < samples; ++i) {
    auto env = sample_environment(cfg.field, horizon, cfg.path_dt, cfg.seed, i);
    Point origin(cfg.field.dimension);
    csv.add_row({std::to_string(i),
                 format_double(env.field.value(origin).norm()),
                 format_double(env.field.jacobian(origin).frobenius2()),
                 format_double(env.path.at(horizon).norm())});
  }
  ctx.emit(csv, "env_summary.csv");
  ctx.finish("sample-env");
  return 0;
}

int run_lagrangian(RunContext& ctx, bool descent, bool dump_path) {
  const auto& cfg = ctx.cfg;
  double horizon = cfg.endpoints.t;
  auto env = sample_environment(cfg.field, horizon, cfg.path_dt, cfg.seed, 0);
  auto est = dp_lagrangian(cfg.endpoints.x, cfg.endpoints.y, cfg.endpoints.s,
                           cfg.endpoints.t, env, cfg.hamiltonian, cfg.lattice);
  if (descent) est = descent_refine(est, env, cfg.hamiltonian, 50);
  if (est.vmax_saturated)
    ctx.report.warnings.push_back("minimizer saturates the speed cap");
  if (est.touched_boundary)
    ctx.report.warnings.push_back("minimizer touched the lattice boundary");

  nlohmann::json j;
  j["value"] = est.value;
  j["method"] = est.method;
  j["kinetic"] = est.breakdown.kinetic;
  j["forcing"] = est.breakdown.forcing;
  j["snapped_x"] = est.snapped_x.to_vector();
  j["snapped_y"] = est.snapped_y.to_vector();
  j["lattice"] = ctx.cfg.to_json()["lattice"];
  fs::path jp = ctx.out_dir / "lagrangian.json";
  std::ofstream(jp) << j.dump(2) << '\n';
  ctx.report.outputs.push_back(jp.string());

  if (dump_path) {
    std::vector<std::string> header = {"k", "t"};
    for (int a = 0; a < cfg.field.dimension; ++a)
      header.push_back("gamma" + std::to_string(a));
    CsvWriter csv(header);
    for (int k = 0; k < static_cast<int>(est.minimizer.nodes.size()); ++k) {
      std::vector<std::string> row = {std::to_string(k),
                                      format_double(est.minimizer.time_at(k))};
      for (auto& c : point_cells(est.minimizer.nodes[k])) row.push_back(c);
      csv.add_row(row);
    }
    ctx.emit(csv, "minimizer_path.csv");
  }
  ctx.finish("lagrangian");
  return 0;
}

int run_solve_hj(RunContext& ctx, const std::string& method, double eps,
                 double theta) {
  const auto& cfg = ctx.cfg;
  double horizon = cfg.probe.t / eps + cfg.path_dt;
  auto env = sample_environment(cfg.field, horizon, cfg.path_dt, cfg.seed, 0);
  std::vector<double> times = {cfg.probe.t};
  SolutionField sol;
  if (method == "hopf") {
    sol = hopf_lax_solve(cfg.datum, env, eps, theta, cfg.hamiltonian,
                         cfg.lattice, times);
    if (sol.truncated)
      ctx.report.warnings.push_back(
          "localization ball exceeds the lattice box");
  } else if (method == "fd") {
    if (cfg.lattice.h > eps / 8.0 + 1e-12)
      ctx.report.warnings.push_back("grid step h exceeds eps/8");
    sol = fd_transformed_solve(cfg.datum, env, eps, theta, cfg.hamiltonian,
                               cfg.lattice, 0.8, times, &ctx.report.warnings);
  } else {
    throw std::invalid_argument("unknown solver method '" + method + "'");
  }

  std::vector<std::string> header;
  for (int a = 0; a < cfg.field.dimension; ++a)
    header.push_back("x" + std::to_string(a));
  header.push_back("t");
  header.push_back("u");
  CsvWriter csv(header);
  for (std::size_t ti = 0; ti < sol.times.size(); ++ti) {
    for (std::size_t c = 0; c < sol.positions.size(); ++c) {
      std::vector<std::string> row = point_cells(sol.positions[c]);
      row.push_back(format_double(sol.times[ti]));
      row.push_back(format_double(sol.values[ti][c]));
      csv.add_row(row);
    }
  }
  ctx.emit(csv, "solution.csv");
  ctx.finish("solve-hj");
  return 0;
}

int run_effective(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<double> lbar, half;
  CsvWriter conv({"velocity", "horizon", "mean", "se", "truncated",
                  "saturated"});
  for (const auto& v : cfg.schedule.velocities) {
    auto est = estimate_Lbar(v, cfg.schedule, cfg.field, cfg.hamiltonian,
                             cfg.lattice, cfg.seed, cfg.workers);
    if (!est.converged)
      ctx.report.warnings.push_back(
          "subadditive means not yet settled at velocity " +
          format_double(v[0]));
    lbar.push_back(est.value);
    half.push_back(est.half_width);
    int saturated = 0;
    for (const auto& row : est.table) {
      saturated += row.saturated;
      conv.add_row({format_double(v[0]), format_double(row.horizon),
                    format_double(row.mean), format_double(row.se),
                    std::to_string(row.truncated),
                    std::to_string(row.saturated)});
    }
    if (saturated > 0)
      ctx.report.warnings.push_back(
          "speed cap saturated in " + std::to_string(saturated) +
          " realizations at velocity " + format_double(v[0]));
  }
  auto table = effective_hamiltonian(cfg.schedule.velocities, lbar, half,
                                     cfg.momenta);

  // two blocks in one file: kind=v rows carry L_bar, kind=p rows carry H_bar
  CsvWriter csv({"kind", "c0", "value", "half_width"});
  for (std::size_t i = 0; i < table.velocities.size(); ++i)
    csv.add_row({"v", format_double(table.velocities[i][0]),
                 format_double(table.lbar[i]),
                 format_double(table.half_width[i])});
  for (std::size_t j = 0; j < table.momenta.size(); ++j) {
    if (table.hbar_boundary_suspect[j])
      ctx.report.warnings.push_back("conjugate truncation suspect at p = " +
                                    format_double(table.momenta[j][0]));
    csv.add_row({"p", format_double(table.momenta[j][0]),
                 format_double(table.hbar[j]), ""});
  }
  ctx.emit(csv, "effective.csv");
  ctx.emit(conv, "effective_convergence.csv");
  ctx.finish("effective");
  return 0;
}

int run_enhancement(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  Point v = cfg.schedule.velocities.front();
  double M = cfg.tent.block_length;
  double delta = cfg.tent.delta;
  if (cfg.tent.use_defaults)
    default_tent_parameters(cfg.field, cfg.hamiltonian, v,
                            0.45 * cfg.field.kappa, &M, &delta);
  auto cert = tent_upper_bound(v, M, delta, cfg.tent.blocks, cfg.field,
                               cfg.hamiltonian, cfg.seed, cfg.tent.samples,
                               cfg.path_dt, cfg.lattice.subsamples,
                               cfg.workers);

  std::vector<double> lbar, half;
  for (const auto& w : cfg.schedule.velocities) {
    auto est = estimate_Lbar(w, cfg.schedule, cfg.field, cfg.hamiltonian,
                             cfg.lattice, cfg.seed, cfg.workers);
    lbar.push_back(est.value);
    half.push_back(est.half_width);
  }
  auto table = effective_hamiltonian(cfg.schedule.velocities, lbar, half,
                                     cfg.momenta);

  CsvWriter csv({"kind", "c0", "value", "half_width", "reference"});
  csv.add_row({"tent_bound", format_double(v[0]), format_double(cert.bound),
               format_double(cert.half_width), format_double(cert.h_star)});
  csv.add_row({"tent_gap", format_double(v[0]), format_double(cert.gap),
               format_double(cert.half_width), ""});
  for (const auto& p : cfg.momenta) {
    auto gap = enhancement_gap(p, table, cfg.field, cfg.hamiltonian,
                               0.45 * cfg.field.kappa);
    csv.add_row({"hbar_gap", format_double(p[0]), format_double(gap.measured),
                 "", format_double(gap.reference)});
  }
  ctx.emit(csv, "enhancement.csv");
  ctx.finish("enhancement");
  return 0;
}

int run_scaling(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto rep = scaling_study(cfg.theta_list, cfg.eps_list, cfg.probe.x,
                           cfg.probe.t, cfg.datum, cfg.field, cfg.hamiltonian,
                           cfg.lattice, cfg.samples, cfg.seed, cfg.workers);
  CsvWriter csv({"theta", "eps", "median_u", "se_median", "dist_noiseless",
                 "dist_hbar"});
  for (const auto& r : rep.rows)
    csv.add_row_values({r.theta, r.eps, r.median_u, r.se_median,
                        r.dist_noiseless, r.dist_hbar});
  ctx.emit(csv, "scaling.csv");
  for (const auto& c : rep.classifications) ctx.report.warnings.push_back(c);
  ctx.finish("scaling");
  return 0;
}

int run_tails(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto rep = regularity_tails(cfg.eps_list, cfg.tails.R, cfg.tails.samples,
                              cfg.lattice, cfg.field, cfg.hamiltonian,
                              cfg.seed, cfg.workers);
  CsvWriter csv({"eps", "median_seminorm", "excess"});
  for (const auto& r : rep.rows)
    csv.add_row_values({r.eps, r.median_seminorm, r.excess});
  ctx.emit(csv, "tails.csv");
  ctx.report.warnings.push_back("holder excess log-log slope: " +
                                format_double(rep.slope));
  ctx.finish("tails");
  return 0;
}

int run_oracle_psi(RunContext& ctx, double T, int samples, bool with_dp) {
  const auto& cfg = ctx.cfg;
  auto st = psi_mean_stats(T, T / 512.0, samples, cfg.seed, cfg.workers);
  CsvWriter csv({"T", "samples", "mean", "se", "target"});
  csv.add_row_values({T, static_cast<double>(st.samples), st.mean, st.se,
                      -T / 12.0});
  ctx.emit(csv, "psi_mean.csv");

  if (with_dp) {
    LatticeSpec lat;
    lat.box = Box{Point{-3.0}, Point{3.0}};
    lat.h = 1.0 / 64.0;
    lat.dt = 1.0 / 128.0;
    lat.vmax = 8.0;
    lat.subsamples = 4;
    auto rep = psi_vs_dp(T, lat, T / 512.0, std::min(samples, 50), cfg.seed,
                         cfg.workers);
    CsvWriter dp({"realization", "psi_closed_form", "dp_value",
                  "relative_error", "excluded_flag"});
    for (const auto& r : rep.rows)
      dp.add_row({std::to_string(r.realization),
                  format_double(r.psi_closed_form),
                  format_double(r.dp_value), format_double(r.relative_error),
                  r.excluded ? "1" : "0"});
    ctx.emit(dp, "psi_vs_dp.csv");
  }
  ctx.finish("oracle-psi");
  return 0;
}

int run_check_invariants(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<std::string> violations;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) violations.push_back(what);
  };

  const auto& H = cfg.hamiltonian;
  CounterRng rng(cfg.seed, "invariants", 0);
  // Fenchel-Young with equality at the subgradient
  for (int i = 0; i < 200; ++i) {
    Point p{4.0 * rng.next_double() - 2.0};
    Point v{4.0 * rng.next_double() - 2.0};
    check(p.dot(v) <= H.eval_H(p) + H.eval_H_star(v) + 1e-12,
          "Fenchel-Young inequality");
    Point vs = H.map_v(p);
    check(std::abs(H.eval_H(p) + H.eval_H_star(vs) - p.dot(vs)) < 1e-10,
          "Fenchel-Young equality at the subgradient");
  }
  // biconjugation on a sampled grid
  {
    std::vector<Point> grid;
    std::vector<double> vals;
    for (double v = -6.0; v <= 6.0 + 1e-9; v += 0.05) {
      grid.push_back(Point{v});
      vals.push_back(H.eval_H_star(Point{v}));
    }
    for (double p = -1.0; p <= 1.0 + 1e-9; p += 0.5)
      check(std::abs(legendre_numeric(grid, vals, Point{p}).value -
                     H.eval_H(Point{p})) < 0.01,
            "discrete biconjugation");
  }
  // subadditivity on random grid triples in one environment
  {
    LatticeSpec lat;
    lat.box = Box{Point{-3.0}, Point{3.0}};
    lat.h = 1.0 / 16.0;
    lat.dt = 1.0 / 8.0;
    lat.vmax = 6.0;
    lat.subsamples = cfg.lattice.subsamples;
    auto env = sample_environment(cfg.field, 1.0, 1.0 / 16.0, cfg.seed, 0);
    std::vector<SubadditivityTriple> triples;
    for (int i = 0; i < 40; ++i) {
      SubadditivityTriple tr;
      auto snap = [&](double lo, double hi) {
        double raw = lo + (hi - lo) * rng.next_double();
        return std::round(raw / lat.h) * lat.h;
      };
      tr.x = Point{snap(-1.0, 1.0)};
      tr.z = Point{snap(-1.2, 1.2)};
      tr.y = Point{snap(-1.0, 1.0)};
      tr.s = 0.0;
      tr.r = 0.5;
      tr.t = 1.0;
      triples.push_back(tr);
    }
    auto rep = check_subadditivity(env, H, lat, triples);
    check(rep.violations == 0, "Lagrangian subadditivity");
  }
  // duality sandwich and convexity on a small estimated profile
  {
    SubadditiveSchedule sch;
    sch.horizons = {2.0, 4.0};
    sch.samples = 12;
    sch.path_dt = 0.25;
    LatticeSpec base;
    base.h = 0.125;
    base.dt = 0.5;
    base.subsamples = cfg.lattice.subsamples;
    std::vector<Point> vels = {Point{-1.0}, Point{-0.5}, Point{0.0},
                               Point{0.5}, Point{1.0}};
    std::vector<double> lbar, half;
    for (const auto& v : vels) {
      auto est = estimate_Lbar(v, sch, cfg.field, H, base,
                               hash_combine(cfg.seed, 0xabc), cfg.workers);
      lbar.push_back(est.value);
      half.push_back(est.half_width);
    }
    // baseline dominance: estimate <= H*(v) + 3 SE
    for (std::size_t i = 0; i < vels.size(); ++i)
      check(lbar[i] <= H.eval_H_star(vels[i]) + 3.0 * half[i] + 0.02,
            "baseline dominance of the straight path");
    // midpoint convexity within combined half-widths
    for (std::size_t i = 1; i + 1 < vels.size(); ++i) {
      double mid = 0.5 * (lbar[i - 1] + lbar[i + 1]);
      double width = half[i - 1] + 2.0 * half[i] + half[i + 1];
      check(lbar[i] <= mid + width + 0.02, "midpoint convexity of L_bar");
    }
    // duality sandwich: p.v - L(v) <= H_bar(p) + tolerance
    auto table = effective_hamiltonian(vels, lbar, half, cfg.momenta);
    for (std::size_t j = 0; j < table.momenta.size(); ++j)
      for (std::size_t i = 0; i < vels.size(); ++i)
        check(table.momenta[j].dot(vels[i]) - lbar[i] <=
                  table.hbar[j] + 0.02,
              "duality sandwich");
  }

  CsvWriter csv({"violation"});
  for (const auto& v : violations) csv.add_row({v});
  ctx.emit(csv, "invariant_violations.csv");
  for (const auto& v : violations)
    ctx.report.warnings.push_back("invariant failed: " + v);
  ctx.finish("check-invariants");
  if (!violations.empty()) {
    std::cerr << violations.size() << " invariant violation(s); see "
              << (ctx.out_dir / "invariant_violations.csv") << "\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for stochastically forced "
               "Hamilton-Jacobi equations"};
  app.require_subcommand(0, 1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::optional<uint64_t> seed_override;
  std::string out_override;
  std::optional<int> workers_override;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--seed", seed_override, "master seed override");
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--workers", workers_override, "worker pool size override");

  auto* sc_env = app.add_subcommand("sample-env", "sample environments");
  int env_samples = 16;
  sc_env->add_option("--samples", env_samples, "number of realizations");

  auto* sc_lag = app.add_subcommand("lagrangian", "random Lagrangian value");
  bool lag_descent = false, lag_dump = false;
  sc_lag->add_flag("--descent", lag_descent, "polish the lattice minimizer");
  sc_lag->add_flag("--dump-path", lag_dump, "write the minimizer path CSV");

  auto* sc_hj = app.add_subcommand("solve-hj", "solve the forced equation");
  std::string hj_method = "hopf";
  double hj_eps = 1.0, hj_theta = 0.5;
  sc_hj->add_option("--method", hj_method, "hopf or fd");
  sc_hj->add_option("--eps", hj_eps, "oscillation scale");
  sc_hj->add_option("--theta", hj_theta, "noise amplitude exponent");

  auto* sc_eff = app.add_subcommand("effective", "estimate L_bar and H_bar");
  auto* sc_enh = app.add_subcommand("enhancement", "certify the gap");
  auto* sc_scal = app.add_subcommand("scaling", "theta-scaling study");
  auto* sc_tail = app.add_subcommand("tails", "Holder-seminorm tails");

  auto* sc_psi = app.add_subcommand("oracle-psi", "psi closed-form checks");
  double psi_T = 1.0;
  int psi_samples = 20000;
  bool psi_dp = false;
  sc_psi->add_option("--T", psi_T, "horizon");
  sc_psi->add_option("--samples", psi_samples, "Monte Carlo paths");
  sc_psi->add_flag("--dp", psi_dp, "also cross-validate the optimizer");

  auto* sc_inv = app.add_subcommand("check-invariants", "invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    std::cerr << app.help() << "\n";
    return 64;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help() << "\n";
    return 64;
  }

  RunContext ctx;
  ctx.started = std::chrono::steady_clock::now();
  try {
    ctx.cfg = config_path.empty() ? ExperimentConfig::defaults()
                                  : ExperimentConfig::load(config_path);
    if (seed_override) ctx.cfg.seed = *seed_override;
    if (workers_override) ctx.cfg.workers = *workers_override;
    if (!out_override.empty()) {
      ctx.cfg.output_dir = out_override;
    } else if (const char* env_dir = std::getenv("FHJ_OUT_DIR")) {
      if (ctx.cfg.output_dir == "out") ctx.cfg.output_dir = env_dir;
    }
    ctx.cfg.validate();
    ctx.out_dir = ctx.cfg.output_dir;
    fs::create_directories(ctx.out_dir);

    if (sc_env->parsed()) return run_sample_env(ctx, env_samples);
    if (sc_lag->parsed()) return run_lagrangian(ctx, lag_descent, lag_dump);
    if (sc_hj->parsed()) return run_solve_hj(ctx, hj_method, hj_eps, hj_theta);
    if (sc_eff->parsed()) return run_effective(ctx);
    if (sc_enh->parsed()) return run_enhancement(ctx);
    if (sc_scal->parsed()) {
      ctx.cfg.validate_eps_resolution();
      return run_scaling(ctx);
    }
    if (sc_tail->parsed()) {
      ctx.cfg.validate_eps_resolution();
      return run_tails(ctx);
    }
    if (sc_psi->parsed()) return run_oracle_psi(ctx, psi_T, psi_samples,
                                                psi_dp);
    if (sc_inv->parsed()) return run_check_invariants(ctx);
    std::cerr << app.help() << "\n";
    return 64;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
