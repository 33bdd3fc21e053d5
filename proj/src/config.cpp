#include "fhj/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

namespace fhj {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object())
    throw std::invalid_argument("config node '" + where +
                                "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw std::invalid_argument("unknown config key '" + where + "." +
                                  it.key() + "'");
  }
}

Point point_from(const json& j, int expect_dim = -1) {
  if (!j.is_array())
    throw std::invalid_argument("expected an array for a point value");
  std::vector<double> xs = j.get<std::vector<double>>();
  if (expect_dim >= 0 && static_cast<int>(xs.size()) != expect_dim)
    throw std::invalid_argument("point has the wrong dimension");
  return Point::from(xs);
}

json point_to(const Point& p) { return json(p.to_vector()); }

template <class T>
T get_or(const json& j, const std::string& key, const T& fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.field.dimension = 1;
  c.field.channels = 1;
  c.field.m0 = 4.0;
  c.field.nonconstant = true;
  FieldMode mode;
  mode.amplitude = ChanVec{1.0};
  mode.wavevector = Point{1.0};
  c.field.modes = {mode};

  c.lattice.box = Box{Point{-8.0}, Point{8.0}};
  c.lattice.h = 0.125;
  c.lattice.dt = 0.125;
  c.lattice.vmax = 4.0;
  c.lattice.subsamples = 4;

  c.schedule.velocities = {Point{0.0}};
  c.schedule.path_dt = c.path_dt;

  c.probe.x = Point{0.0};
  c.probe.t = 1.0;
  c.endpoints.x = Point{0.0};
  c.endpoints.y = Point{1.0};

  c.datum = InitialDatum::linear(Point{0.5});
  c.momenta = {Point{-1.0}, Point{-0.5}, Point{0.0}, Point{0.5}, Point{1.0}};
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  require_keys(j, "", {"version", "hamiltonian", "field", "lattice", "path_dt",
                       "schedule", "tent", "tails", "eps_list", "theta_list",
                       "probe", "endpoints", "initial_datum", "momenta",
                       "samples", "seed", "output_dir", "workers"});
  ExperimentConfig c = defaults();
  c.version = get_or<std::string>(j, "version", kConfigVersion);
  if (c.version != kConfigVersion)
    throw std::invalid_argument("unsupported config version '" + c.version +
                                "'");

  if (j.contains("hamiltonian")) {
    const auto& h = j.at("hamiltonian");
    require_keys(h, "hamiltonian", {"q", "c"});
    c.hamiltonian = PowerLawHamiltonian(get_or<double>(h, "q", 2.0),
                                        get_or<double>(h, "c", 1.0));
  }

  if (j.contains("field")) {
    const auto& f = j.at("field");
    require_keys(f, "field", {"dimension", "channels", "m0", "kappa",
                              "nonconstant", "modes"});
    FieldSpec spec;
    spec.dimension = get_or<int>(f, "dimension", 1);
    spec.channels = get_or<int>(f, "channels", 1);
    spec.m0 = get_or<double>(f, "m0", 4.0);
    spec.kappa = get_or<double>(f, "kappa", 0.5);
    spec.nonconstant = get_or<bool>(f, "nonconstant", false);
    spec.modes.clear();
    if (f.contains("modes")) {
      for (const auto& m : f.at("modes")) {
        require_keys(m, "field.modes[]", {"amplitude", "wavevector"});
        FieldMode mode;
        mode.amplitude = ChanVec::from(
            m.at("amplitude").get<std::vector<double>>());
        mode.wavevector = point_from(m.at("wavevector"), spec.dimension);
        if (mode.amplitude.dim() != spec.channels)
          throw std::invalid_argument("mode amplitude channel mismatch");
        spec.modes.push_back(mode);
      }
    }
    c.field = spec;
  }

  if (j.contains("lattice")) {
    const auto& l = j.at("lattice");
    require_keys(l, "lattice",
                 {"box_lo", "box_hi", "h", "dt", "vmax", "subsamples"});
    c.lattice.box.lo = point_from(l.at("box_lo"));
    c.lattice.box.hi = point_from(l.at("box_hi"));
    c.lattice.h = get_or<double>(l, "h", c.lattice.h);
    c.lattice.dt = get_or<double>(l, "dt", c.lattice.dt);
    c.lattice.vmax = get_or<double>(l, "vmax", c.lattice.vmax);
    c.lattice.subsamples = get_or<int>(l, "subsamples", c.lattice.subsamples);
  }

  c.path_dt = get_or<double>(j, "path_dt", c.path_dt);

  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    require_keys(s, "schedule",
                 {"horizons", "samples", "velocities", "box_margin"});
    c.schedule.horizons =
        get_or<std::vector<double>>(s, "horizons", c.schedule.horizons);
    c.schedule.samples = get_or<int>(s, "samples", c.schedule.samples);
    c.schedule.box_margin =
        get_or<double>(s, "box_margin", c.schedule.box_margin);
    if (s.contains("velocities")) {
      c.schedule.velocities.clear();
      for (const auto& v : s.at("velocities"))
        c.schedule.velocities.push_back(point_from(v, c.field.dimension));
    }
  }
  c.schedule.path_dt = c.path_dt;

  if (j.contains("tent")) {
    const auto& t = j.at("tent");
    require_keys(t, "tent", {"block_length", "delta", "blocks", "samples",
                             "use_defaults"});
    c.tent.block_length = get_or<double>(t, "block_length", c.tent.block_length);
    c.tent.delta = get_or<double>(t, "delta", c.tent.delta);
    c.tent.blocks = get_or<int>(t, "blocks", c.tent.blocks);
    c.tent.samples = get_or<int>(t, "samples", c.tent.samples);
    c.tent.use_defaults = get_or<bool>(t, "use_defaults", false);
  }

  if (j.contains("tails")) {
    const auto& t = j.at("tails");
    require_keys(t, "tails", {"R", "samples"});
    c.tails.R = get_or<double>(t, "R", c.tails.R);
    c.tails.samples = get_or<int>(t, "samples", c.tails.samples);
  }

  c.eps_list = get_or<std::vector<double>>(j, "eps_list", c.eps_list);
  c.theta_list = get_or<std::vector<double>>(j, "theta_list", c.theta_list);

  if (j.contains("probe")) {
    const auto& p = j.at("probe");
    require_keys(p, "probe", {"x", "t"});
    c.probe.x = point_from(p.at("x"), c.field.dimension);
    c.probe.t = get_or<double>(p, "t", 1.0);
  }

  if (j.contains("endpoints")) {
    const auto& e = j.at("endpoints");
    require_keys(e, "endpoints", {"x", "y", "s", "t"});
    c.endpoints.x = point_from(e.at("x"), c.field.dimension);
    c.endpoints.y = point_from(e.at("y"), c.field.dimension);
    c.endpoints.s = get_or<double>(e, "s", 0.0);
    c.endpoints.t = get_or<double>(e, "t", 1.0);
  }

  if (j.contains("initial_datum")) {
    const auto& d = j.at("initial_datum");
    require_keys(d, "initial_datum",
                 {"kind", "slope", "center", "height", "width", "tab_x",
                  "tab_v"});
    std::string kind = d.at("kind").get<std::string>();
    if (kind == "linear") {
      c.datum = InitialDatum::linear(point_from(d.at("slope"),
                                                c.field.dimension));
    } else if (kind == "bump") {
      c.datum = InitialDatum::bump(point_from(d.at("center"),
                                              c.field.dimension),
                                   get_or<double>(d, "height", 1.0),
                                   get_or<double>(d, "width", 1.0));
    } else if (kind == "cone") {
      c.datum = InitialDatum::cone(point_from(d.at("center"),
                                              c.field.dimension),
                                   get_or<double>(d, "height", 1.0));
    } else if (kind == "tabulated") {
      c.datum = InitialDatum::tabulated(
          d.at("tab_x").get<std::vector<double>>(),
          d.at("tab_v").get<std::vector<double>>());
    } else {
      throw std::invalid_argument("unknown initial datum kind '" + kind + "'");
    }
  }

  if (j.contains("momenta")) {
    c.momenta.clear();
    for (const auto& p : j.at("momenta"))
      c.momenta.push_back(point_from(p, c.field.dimension));
  }

  c.samples = get_or<int>(j, "samples", c.samples);
  c.seed = get_or<uint64_t>(j, "seed", c.seed);
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
  c.workers = get_or<int>(j, "workers", c.workers);

  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot read config " + path.string());
  json j = json::parse(f);
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json j;
  j["version"] = version;
  j["hamiltonian"] = {{"q", hamiltonian.q()}, {"c", hamiltonian.scale()}};
  json modes = json::array();
  for (const auto& m : field.modes)
    modes.push_back({{"amplitude", m.amplitude.to_vector()},
                     {"wavevector", m.wavevector.to_vector()}});
  j["field"] = {{"dimension", field.dimension},
                {"channels", field.channels},
                {"m0", field.m0},
                {"kappa", field.kappa},
                {"nonconstant", field.nonconstant},
                {"modes", modes}};
  j["lattice"] = {{"box_lo", lattice.box.lo.to_vector()},
                  {"box_hi", lattice.box.hi.to_vector()},
                  {"h", lattice.h},
                  {"dt", lattice.dt},
                  {"vmax", lattice.vmax},
                  {"subsamples", lattice.subsamples}};
  j["path_dt"] = path_dt;
  json vels = json::array();
  for (const auto& v : schedule.velocities) vels.push_back(v.to_vector());
  j["schedule"] = {{"horizons", schedule.horizons},
                   {"samples", schedule.samples},
                   {"velocities", vels},
                   {"box_margin", schedule.box_margin}};
  j["tent"] = {{"block_length", tent.block_length},
               {"delta", tent.delta},
               {"blocks", tent.blocks},
               {"samples", tent.samples},
               {"use_defaults", tent.use_defaults}};
  j["tails"] = {{"R", tails.R}, {"samples", tails.samples}};
  j["eps_list"] = eps_list;
  j["theta_list"] = theta_list;
  j["probe"] = {{"x", probe.x.to_vector()}, {"t", probe.t}};
  j["endpoints"] = {{"x", endpoints.x.to_vector()},
                    {"y", endpoints.y.to_vector()},
                    {"s", endpoints.s},
                    {"t", endpoints.t}};
  json d;
  switch (datum.kind) {
    case InitialDatum::Kind::linear:
      d = {{"kind", "linear"}, {"slope", datum.slope.to_vector()}};
      break;
    case InitialDatum::Kind::bump:
      d = {{"kind", "bump"},
           {"center", datum.center.to_vector()},
           {"height", datum.height},
           {"width", datum.width}};
      break;
    case InitialDatum::Kind::cone:
      d = {{"kind", "cone"},
           {"center", datum.center.to_vector()},
           {"height", datum.height}};
      break;
    case InitialDatum::Kind::tabulated:
      d = {{"kind", "tabulated"}, {"tab_x", datum.tab_x},
           {"tab_v", datum.tab_v}};
      break;
  }
  j["initial_datum"] = d;
  json ms = json::array();
  for (const auto& p : momenta) ms.push_back(p.to_vector());
  j["momenta"] = ms;
  j["samples"] = samples;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["workers"] = workers;
  return j;
}

void ExperimentConfig::validate() const {
  field.validate();
  lattice.validate();
  if (path_dt <= 0.0) throw std::invalid_argument("path_dt must be positive");
  if (!nearly_integer(lattice.dt / path_dt))
    throw std::invalid_argument("lattice dt must be a multiple of path_dt");
  schedule.validate();
  if (!tent.use_defaults && tent.delta > 0.5 * tent.block_length + 1e-12)
    throw std::invalid_argument("tent delta must satisfy delta <= M/2");
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  for (double e : eps_list)
    if (e <= 0.0) throw std::invalid_argument("eps values must be positive");
  if (tails.R <= 1.0) throw std::invalid_argument("tails.R must exceed 1");
}

void ExperimentConfig::validate_eps_resolution() const {
  double min_eps = *std::min_element(eps_list.begin(), eps_list.end());
  if (lattice.h > min_eps / 8.0 + 1e-12)
    throw std::invalid_argument(
        "lattice h must satisfy h <= eps/8 for the smallest eps in eps_list");
}

}  // namespace fhj
