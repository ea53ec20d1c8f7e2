#include "bte/config.hpp"

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace bte {

namespace {

struct Entry {
  std::string key;
  std::string type;
  std::function<void(RunConfig&, const YAML::Node&)> set;
  std::function<nlohmann::ordered_json(const RunConfig&)> get;
};

template <class T> std::string type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else if constexpr (std::is_same_v<T, std::string>) return "a string";
  else return "a list of numbers";
}

template <class F> Entry bind(std::string key, F ref) {
  using T = std::remove_reference_t<decltype(ref(std::declval<RunConfig&>()))>;
  return {std::move(key), type_name<T>(),
          [ref](RunConfig& c, const YAML::Node& n) {
            if constexpr (std::is_same_v<T, std::vector<double>>) {
              if (!n.IsSequence()) throw YAML::BadConversion(n.Mark());
            } else if (!n.IsScalar()) {
              throw YAML::BadConversion(n.Mark());
            }
            ref(c) = n.as<T>();
          },
          [ref](const RunConfig& c) { return nlohmann::ordered_json(ref(const_cast<RunConfig&>(c))); }};
}

#define BTE_KEY(path, member) bind(path, [](RunConfig& c) -> auto& { return c.member; })

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      BTE_KEY("velocity.radius", velocity.radius),
      BTE_KEY("velocity.n", velocity.n),
      BTE_KEY("sphere.scheme", sphere.scheme),
      BTE_KEY("sphere.n_theta", sphere.n_theta),
      BTE_KEY("sphere.n_phi", sphere.n_phi),
      BTE_KEY("kernel.kind", kernel.kind),
      BTE_KEY("kernel.gamma", kernel.gamma),
      BTE_KEY("kernel.bgk_nu", kernel.bgk_nu),
      BTE_KEY("kernel.conservative_fix", kernel.conservative_fix),
      BTE_KEY("proj.tol_ker", proj.tol_ker),
      BTE_KEY("proj.use_gram", proj.use_gram),
      BTE_KEY("transport.tol", transport.tol),
      BTE_KEY("transport.max_iter", transport.max_iter),
      BTE_KEY("kinetic.epsilon", kinetic.epsilon),
      BTE_KEY("kinetic.r", kinetic.r),
      BTE_KEY("kinetic.c1", kinetic.c1),
      BTE_KEY("kinetic.c2", kinetic.c2),
      BTE_KEY("kinetic.dt", kinetic.dt),
      BTE_KEY("kinetic.t_end", kinetic.t_end),
      BTE_KEY("kinetic.cfl", kinetic.cfl),
      BTE_KEY("kinetic.integrator", kinetic.integrator),
      BTE_KEY("kinetic.transport", kinetic.transport),
      BTE_KEY("kinetic.nonlinear", kinetic.nonlinear),
      BTE_KEY("kinetic.implicit_tol", kinetic.implicit_tol),
      BTE_KEY("kinetic.implicit_max_iter", kinetic.implicit_max_iter),
      BTE_KEY("kinetic.positivity_every", kinetic.positivity_every),
      BTE_KEY("space.dim", space.dim),
      BTE_KEY("space.n", space.n),
      BTE_KEY("monitor.s", monitor.s),
      BTE_KEY("monitor.every", monitor.every),
      BTE_KEY("initial.profile", initial.profile),
      BTE_KEY("initial.amplitude1", initial.amplitude1),
      BTE_KEY("initial.amplitude2", initial.amplitude2),
      BTE_KEY("initial.density_offset", initial.density_offset),
      BTE_KEY("fluid.mu", fluid.mu),
      BTE_KEY("fluid.kappa", fluid.kappa),
      BTE_KEY("fluid.sigma", fluid.sigma),
      BTE_KEY("fluid.lambda", fluid.lambda),
      BTE_KEY("fluid.from_transport", fluid.from_transport),
      BTE_KEY("fluid.dt", fluid.dt),
      BTE_KEY("fluid.t_end", fluid.t_end),
      BTE_KEY("fluid.cfl", fluid.cfl),
      BTE_KEY("fluid.every", fluid.every),
      BTE_KEY("fluid.flags.from_regime", fluid.flags.from_regime),
      BTE_KEY("fluid.flags.advect1", fluid.flags.advect1),
      BTE_KEY("fluid.flags.diffuse1", fluid.flags.diffuse1),
      BTE_KEY("fluid.flags.advect2", fluid.flags.advect2),
      BTE_KEY("fluid.flags.diffuse2", fluid.flags.diffuse2),
      BTE_KEY("fluid.flags.coupling", fluid.flags.coupling),
      BTE_KEY("regime.band_lo", regime.band_lo),
      BTE_KEY("regime.band_hi", regime.band_hi),
      BTE_KEY("regime.strong_delta", regime.strong_delta),
      BTE_KEY("harness.eps", harness.eps),
      BTE_KEY("harness.t_end", harness.t_end),
      BTE_KEY("harness.samples", harness.samples),
      BTE_KEY("run.seed", seed),
      BTE_KEY("run.workers", workers),
      BTE_KEY("run.out", out),
  };
  return entries;
}

#undef BTE_KEY

const Entry* find_entry(const std::string& key) {
  for (const auto& e : registry())
    if (e.key == key) return &e;
  return nullptr;
}

bool is_section(const std::string& prefix) {
  for (const auto& e : registry())
    if (e.key.rfind(prefix + ".", 0) == 0) return true;
  return false;
}

std::string where(const std::string& origin, const YAML::Mark& m) {
  return m.is_null() ? origin : origin + ":" + std::to_string(m.line + 1);
}

void assign(RunConfig& cfg, const Entry& e, const YAML::Node& value, const std::string& origin) {
  try {
    e.set(cfg, value);
  } catch (const YAML::Exception&) {
    throw ConfigError(where(origin, value.Mark()) + ": key '" + e.key + "' expects " + e.type);
  }
}

void walk(RunConfig& cfg, const YAML::Node& node, const std::string& prefix, const std::string& origin) {
  if (!node.IsMap())
    throw ConfigError(where(origin, node.Mark()) + ": " + (prefix.empty() ? "document" : "section '" + prefix + "'") +
                      " must be a mapping");
  for (const auto& kv : node) {
    const std::string name = kv.first.as<std::string>();
    const std::string path = prefix.empty() ? name : prefix + "." + name;
    if (const Entry* e = find_entry(path)) {
      assign(cfg, *e, kv.second, origin);
    } else if (is_section(path)) {
      walk(cfg, kv.second, path, origin);
    } else {
      throw ConfigError(where(origin, kv.first.Mark()) + ": unknown key '" + path + "'");
    }
  }
}

template <class F> void check(bool ok, const char* key, F&& message) {
  if (!ok) throw ConfigError(std::string("config key '") + key + "': " + message());
}

void check(bool ok, const char* key, const char* message) {
  check(ok, key, [&] { return std::string(message); });
}

template <class Parse> void check_parse(const char* key, Parse&& parse) {
  try {
    parse();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  check(velocity.radius >= 4.0, "velocity.radius", "must be at least 4 (the Maxwellian tail must fit in the box)");
  check(velocity.n >= 8 && velocity.n % 2 == 0, "velocity.n", "must be even and at least 8");
  check(sphere.scheme == "gauss_legendre", "sphere.scheme", "only gauss_legendre is available");
  check(sphere.n_theta >= 1 && sphere.n_phi >= 1, "sphere.n_theta", "node counts must be positive");
  check_parse("kernel.kind", [&] { parse_kernel_kind(kernel.kind); });
  check(kernel.gamma == 0.0 || kernel.gamma == 1.0, "kernel.gamma", "must be 0 or 1");
  check(kernel.bgk_nu > 0.0, "kernel.bgk_nu", "must be positive");
  check(proj.tol_ker > 0.0, "proj.tol_ker", "must be positive");
  check(transport.tol > 0.0, "transport.tol", "must be positive");
  check(transport.max_iter >= 1, "transport.max_iter", "must be positive");
  check_parse("kinetic.integrator", [&] { parse_integrator(kinetic.integrator); });
  check_parse("kinetic.transport", [&] { parse_transport_scheme(kinetic.transport); });
  check_parse("kinetic", [&] { kinetic_config().validate(); });
  check(space.dim == 1 || space.dim == 2, "space.dim", "must be 1 or 2");
  check(space.n >= 4 && space.n % 2 == 0, "space.n", "must be even and at least 4");
  check_parse("initial.profile", [&] { parse_initial_profile(initial.profile); });
  check(initial.profile != "taylor_green" || space.dim == 2, "initial.profile", "taylor_green needs space.dim = 2");
  check(fluid.mu > 0 && fluid.kappa > 0 && fluid.sigma > 0 && fluid.lambda > 0, "fluid",
        "mu, kappa, sigma, lambda must be positive");
  check(fluid.dt >= 0.0, "fluid.dt", "must be >= 0 (0 = automatic)");
  check(fluid.t_end >= 0.0, "fluid.t_end", "must be >= 0");
  check(fluid.cfl > 0.0, "fluid.cfl", "must be positive");
  check(fluid.every >= 1, "fluid.every", "must be positive");
  if (fluid.flags.from_regime) check_parse("kinetic", [&] { classify(kinetic.r, kinetic.c1, kinetic.c2); });
  check(regime.band_lo > 0.0 && regime.band_lo < regime.band_hi, "regime.band_lo", "need 0 < band_lo < band_hi");
  check(regime.strong_delta > 0.0, "regime.strong_delta", "must be positive");
  check(!harness.eps.empty(), "harness.eps", "must not be empty");
  for (std::size_t i = 0; i < harness.eps.size(); ++i) {
    check(harness.eps[i] > 0.0, "harness.eps", "entries must be positive");
    check(i == 0 || harness.eps[i] < harness.eps[i - 1], "harness.eps", "must be strictly decreasing");
  }
  check(harness.t_end >= 0.0, "harness.t_end", "must be >= 0");
  check(harness.samples >= 1, "harness.samples", "must be positive");
  check(workers >= 1, "run.workers", "must be positive");
  check(!out.empty(), "run.out", "must not be empty");
}

CollisionModel RunConfig::make_model() const {
  CollisionKernel k;
  k.kind = parse_kernel_kind(kernel.kind);
  k.gamma = k.kind == KernelKind::maxwellian_molecule ? 0.0 : kernel.gamma;
  k.bgk_nu = kernel.bgk_nu;
  k.conservative_fix = kernel.conservative_fix;
  return CollisionModel(build_grid(velocity.radius, velocity.n), build_sphere(sphere.n_theta, sphere.n_phi),
                        std::move(k));
}

KineticConfig RunConfig::kinetic_config() const {
  KineticConfig k;
  k.epsilon = kinetic.epsilon;
  k.r = kinetic.r;
  k.c1 = kinetic.c1;
  k.c2 = kinetic.c2;
  k.dt = kinetic.dt;
  k.t_end = kinetic.t_end;
  k.cfl = kinetic.cfl;
  k.integrator = parse_integrator(kinetic.integrator);
  k.transport = parse_transport_scheme(kinetic.transport);
  k.sobolev_s = monitor.s;
  k.monitor_every = monitor.every;
  k.positivity_every = kinetic.positivity_every;
  k.nonlinear = kinetic.nonlinear;
  k.implicit_tol = kinetic.implicit_tol;
  k.implicit_max_iter = kinetic.implicit_max_iter;
  return k;
}

LimitConfig RunConfig::limit_config() const {
  LimitConfig l;
  l.eps_values = harness.eps;
  l.kinetic = kinetic_config();
  l.kinetic.t_end = harness.t_end;
  l.dim = space.dim;
  l.n = space.n;
  l.profile = parse_initial_profile(initial.profile);
  l.amplitude[0] = initial.amplitude1;
  l.amplitude[1] = initial.amplitude2;
  l.density_offset = initial.density_offset;
  l.samples = harness.samples;
  l.workers = workers;
  l.fluid_cfl = fluid.cfl;
  return l;
}

RegimeFlags RunConfig::fluid_flags() const {
  if (fluid.flags.from_regime) return classify(kinetic.r, kinetic.c1, kinetic.c2).flags;
  RegimeFlags f;
  f.species[0] = {fluid.flags.advect1, fluid.flags.diffuse1};
  f.species[1] = {fluid.flags.advect2, fluid.flags.diffuse2};
  f.coupling = fluid.flags.coupling;
  return f;
}

InteractionThresholds RunConfig::thresholds() const { return {regime.band_lo, regime.band_hi, regime.strong_delta}; }

SolveOptions RunConfig::solve_options() const {
  SolveOptions o;
  o.tol = transport.tol;
  o.max_iter = transport.max_iter;
  return o;
}

RunConfig parse_config(const std::string& yaml_text, const std::string& origin) {
  RunConfig cfg;
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(where(origin, e.mark) + ": " + e.msg);
  }
  if (!root.IsNull()) walk(cfg, root, "", origin);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "': expected key=value");
  const std::string key = assignment.substr(0, eq);
  const Entry* e = find_entry(key);
  if (!e) throw ConfigError("override '" + assignment + "': unknown key '" + key + "'");
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::ParserException& ex) {
    throw ConfigError("override '" + assignment + "': " + ex.msg);
  }
  assign(cfg, *e, value, "override");
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& e : registry()) {
    nlohmann::ordered_json* node = &j;
    std::string rest = e.key;
    for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
      node = &(*node)[rest.substr(0, dot)];
      rest = rest.substr(dot + 1);
    }
    (*node)[rest] = e.get(cfg);
  }
  return j;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : registry()) keys.push_back(e.key);
  return keys;
}

}  // namespace bte
