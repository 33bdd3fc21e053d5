#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "fhj/env.hpp"
#include "fhj/hamiltonian.hpp"
#include "fhj/hj.hpp"
#include "fhj/homog.hpp"
#include "fhj/optimizer.hpp"

namespace fhj {

inline constexpr const char* kConfigVersion = "fhj-config/1";

struct ProbeConfig {
  Point x;
  double t = 1.0;
};

struct EndpointConfig {
  Point x, y;
  double s = 0.0;
  double t = 1.0;
};

struct TentConfig {
  double block_length = 16.0;
  double delta = 1.5;
  int blocks = 8;
  int samples = 128;
  bool use_defaults = false;  // derive (M, delta) from the field instead
};

struct TailsConfig {
  double R = 2.0;
  int samples = 200;
};

// One validated key-value tree drives every subcommand; unknown keys are
// hard errors so experiment definitions cannot silently drift.
struct ExperimentConfig {
  std::string version = kConfigVersion;
  PowerLawHamiltonian hamiltonian{2.0, 1.0};
  FieldSpec field;
  LatticeSpec lattice;
  double path_dt = 0.0625;
  SubadditiveSchedule schedule;
  TentConfig tent;
  TailsConfig tails;
  std::vector<double> eps_list = {0.25, 0.125, 0.0625, 0.03125, 0.015625};
  std::vector<double> theta_list = {0.75, 0.5, 0.25};
  ProbeConfig probe;
  EndpointConfig endpoints;
  InitialDatum datum;
  std::vector<Point> momenta;
  int samples = 32;
  uint64_t seed = 20260808;
  std::string output_dir = "out";
  int workers = 0;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig defaults();
  nlohmann::json to_json() const;

  // cross-field constraints that do not depend on the subcommand
  void validate() const;
  // constraints specific to the eps-resolved solvers
  void validate_eps_resolution() const;
};

}  // namespace fhj
