#include "rolesim/commands.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "rolesim/analytic.hpp"
#include "rolesim/egta.hpp"
#include "rolesim/errors.hpp"
#include "rolesim/io.hpp"
#include "rolesim/sweep.hpp"

namespace rolesim {

namespace {

ConfigError bad(const Settings::Entry& e, const std::string& why) {
  return ConfigError(fmt::format("{}: {} (got '{}')", e.origin, why, e.value));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::size_t default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

nlohmann::json sim_json(const SimConfig& c) {
  return {{"builders", c.n_builders},
          {"searchers", c.n_searchers},
          {"rounds", c.rounds},
          {"pc", c.conflict_probability},
          {"lambda", c.value_rate},
          {"temperature", c.temperature},
          {"eta", c.learning_rate},
          {"trigger", c.ga.trigger_probability},
          {"elimination", c.ga.elimination_ratio},
          {"mutation", c.ga.mutation_rate},
          {"capacity", c.capacity == kUnboundedCapacity ? nlohmann::json("unbounded")
                                                        : nlohmann::json(c.capacity)},
          {"seed", c.seed},
          {"ma_window", c.ma_window},
          {"snapshot_every", c.snapshot_every},
          {"rounds_csv", c.record_rounds}};
}

std::vector<double> probability_grid(const Settings& s, const std::string& fallback) {
  const auto* e = s.find("pc");
  auto grid = s.grid("pc").value_or(parse_grid(fallback));
  for (double p : grid)
    if (!(p >= 0.0 && p <= 1.0)) {
      if (e) throw bad(*e, "conflict probabilities must lie in [0, 1]");
      throw ConfigError("conflict probabilities must lie in [0, 1]");
    }
  return grid;
}

}  // namespace

// ---------------------------------------------------------------- Settings

void Settings::set(const std::string& key, std::string value, std::string origin) {
  entries_[key] = {std::move(value), std::move(origin)};
}

void Settings::merge(const Settings& over) {
  for (const auto& [k, e] : over.entries_) entries_[k] = e;
}

const Settings::Entry* Settings::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::string> Settings::text(const std::string& key) const {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  return e->value;
}

std::optional<double> Settings::real(const std::string& key) const {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(e->value, &used);
  } catch (const std::exception&) {
    throw bad(*e, key + " must be a number");
  }
  if (used != e->value.size() || !std::isfinite(v)) throw bad(*e, key + " must be a number");
  return v;
}

std::optional<std::size_t> Settings::count(const std::string& key, std::size_t min) const {
  const auto v = real(key);
  if (!v) return std::nullopt;
  const auto* e = find(key);
  if (*v < 0.0 || *v != std::floor(*v) || *v > 1e15)
    throw bad(*e, key + " must be a non-negative integer");
  const auto n = static_cast<std::size_t>(*v);
  if (n < min) throw bad(*e, fmt::format("{} must be at least {}", key, min));
  return n;
}

std::optional<std::uint64_t> Settings::seed(const std::string& key) const {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!e->value.empty() && e->value.front() == '-') throw std::invalid_argument("negative");
    v = std::stoull(e->value, &used);
  } catch (const std::exception&) {
    throw bad(*e, key + " must be an unsigned 64-bit integer");
  }
  if (used != e->value.size()) throw bad(*e, key + " must be an unsigned 64-bit integer");
  return v;
}

std::optional<double> Settings::probability(const std::string& key) const {
  const auto v = real(key);
  if (v && !(*v >= 0.0 && *v <= 1.0)) throw bad(*find(key), key + " must lie in [0, 1]");
  return v;
}

std::optional<bool> Settings::flag(const std::string& key) const {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  const auto v = lower(e->value);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw bad(*e, key + " must be true or false");
}

std::optional<std::vector<double>> Settings::grid(const std::string& key) const {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  try {
    return parse_grid(e->value);
  } catch (const ConfigError& err) {
    throw ConfigError(fmt::format("{}: {}", e->origin, err.what()));
  }
}

const std::vector<std::string>& known_setting_keys() {
  static const std::vector<std::string> keys = {
      "builders",  "searchers", "rounds",      "pc",         "lambda",         "temperature",
      "eta",       "trigger",   "elimination", "mutation",   "capacity",       "seed",
      "ma_window", "snapshot_every",           "rounds_csv", "reps",           "jobs",
      "agents",    "alpha",     "population",  "fixation",   "hpt_file",       "points",
      "mc_points", "mc_samples", "fd_points",  "fd_step",    "out"};
  return keys;
}

Settings load_settings_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw IoError("cannot read config " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}: {}", path.string(), e.mark.line + 1, e.msg));
  } catch (const YAML::BadFile&) {
    throw IoError("cannot read config " + path.string());
  }
  Settings s;
  if (root.IsNull()) return s;
  const auto where = [&](const YAML::Node& n) {
    return fmt::format("{}:{}", path.string(), n.Mark().line + 1);
  };
  if (!root.IsMap()) throw ConfigError(where(root) + ": config must be a mapping of key: value");
  const auto& keys = known_setting_keys();
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError(fmt::format("{}: unknown key '{}'", where(kv.first), key));
    const auto& node = kv.second;
    std::string value;
    if (node.IsScalar()) {
      value = node.as<std::string>();
    } else if (node.IsSequence()) {
      for (std::size_t i = 0; i < node.size(); ++i) {
        if (!node[i].IsScalar())
          throw ConfigError(fmt::format("{}: '{}' list entries must be scalars", where(node[i]), key));
        if (i) value += ',';
        value += node[i].as<std::string>();
      }
    } else {
      throw ConfigError(fmt::format("{}: '{}' needs a value", where(kv.first), key));
    }
    s.set(key, value, where(kv.first));
  }
  return s;
}

SimConfig sim_config_from(const Settings& s, SimConfig c) {
  if (auto v = s.count("builders")) c.n_builders = *v;
  if (auto v = s.count("searchers")) c.n_searchers = *v;
  if (auto v = s.count("rounds", 1)) c.rounds = *v;
  if (auto v = s.real("lambda")) {
    if (!(*v > 0.0)) throw bad(*s.find("lambda"), "lambda must be positive");
    c.value_rate = *v;
  }
  if (auto v = s.real("temperature")) {
    if (!(*v > 0.0)) throw bad(*s.find("temperature"), "temperature must be positive");
    c.temperature = *v;
  }
  if (auto v = s.probability("eta")) c.learning_rate = *v;
  if (auto v = s.probability("trigger")) c.ga.trigger_probability = *v;
  if (auto v = s.probability("elimination")) c.ga.elimination_ratio = *v;
  if (auto v = s.probability("mutation")) c.ga.mutation_rate = *v;
  if (const auto* e = s.find("capacity")) {
    if (lower(e->value) == "unbounded")
      c.capacity = kUnboundedCapacity;
    else
      c.capacity = *s.count("capacity", 1);
  }
  if (auto v = s.seed("seed")) c.seed = *v;
  if (auto v = s.count("ma_window", 1)) c.ma_window = *v;
  if (auto v = s.count("snapshot_every")) c.snapshot_every = *v;
  if (auto v = s.flag("rounds_csv")) c.record_rounds = *v;
  return c;
}

std::filesystem::path output_directory(const Settings& s) {
  if (auto v = s.text("out")) return *v;
  if (const char* env = std::getenv("ROLESIM_OUT_DIR"); env && *env) return env;
  return "rolesim-out";
}

// ---------------------------------------------------------------- commands

int cmd_simulate(const Settings& s) {
  const auto start = std::chrono::steady_clock::now();
  SimConfig cfg = sim_config_from(s);
  if (const auto grid = s.grid("pc")) {
    if (grid->size() != 1) throw bad(*s.find("pc"), "simulate takes a single conflict probability");
    cfg.conflict_probability = grid->front();
  }
  cfg.validate();
  const auto dir = output_directory(s);
  ensure_directory(dir);

  const auto result = run_simulation(cfg);
  RunManifest manifest("simulate", cfg.seed, sim_json(cfg).dump());
  manifest.write_output(dir, "metrics.csv", metrics_csv(result.metrics, cfg.ma_window),
                        kMetricsSchema);
  if (cfg.record_rounds)
    manifest.write_output(dir, "rounds.csv", rounds_csv(result.records, cfg.n_builders),
                          kRoundsSchema);
  manifest.write_output(dir, "pools.json", pools_json(result.snapshots) + "\n", kPoolsSchema);
  manifest.finish(dir, seconds_since(start));

  const auto& m = result.metrics;
  fmt::print("simulate: {} rounds, final-10% bid ratio {:.4f}, rebate ratio {:.4f}, "
             "max residual {:.2e} -> {}\n",
             m.size(), tail_mean(m.bid_ratio), tail_mean(m.rebate_ratio), m.max_residual,
             dir.string());
  return 0;
}

int cmd_sweep(const Settings& s) {
  const auto start = std::chrono::steady_clock::now();
  SimConfig base;
  base.n_builders = 5;
  base.n_searchers = 5;
  base = sim_config_from(s, base);
  const auto p_values = probability_grid(s, "0:1:0.1");
  const std::size_t reps = s.count("reps", 1).value_or(10);
  const std::size_t jobs = s.count("jobs", 1).value_or(default_jobs());
  base.record_rounds = false;
  base.validate();
  const auto dir = output_directory(s);
  ensure_directory(dir);

  const auto rows = sweep_conflict(base, p_values, reps, jobs);
  auto echo = sim_json(base);
  echo["pc"] = p_values;
  echo["reps"] = reps;
  echo["jobs"] = jobs;
  RunManifest manifest("sweep", base.seed, echo.dump());
  manifest.write_output(dir, "sweep.csv", sweep_csv(rows), kSweepSchema);
  manifest.finish(dir, seconds_since(start));
  fmt::print("sweep: {} conflict probabilities x {} repetitions -> {}\n", p_values.size(), reps,
             dir.string());
  return 0;
}

int cmd_egta(const Settings& s) {
  const auto start = std::chrono::steady_clock::now();
  const auto alphas = s.grid("alpha").value_or(parse_grid("0.1:100:log30"));
  for (double a : alphas)
    if (!(a >= 0.0)) throw ConfigError("alpha values must be non-negative");
  FixationModel model = FixationModel::OneMutant;
  if (const auto* e = s.find("fixation")) {
    const auto v = lower(e->value);
    if (v == "one-mutant")
      model = FixationModel::OneMutant;
    else if (v == "full-profile")
      model = FixationModel::FullProfile;
    else
      throw bad(*e, "fixation must be one-mutant or full-profile");
  }
  const std::size_t jobs = s.count("jobs", 1).value_or(default_jobs());
  const auto dir = output_directory(s);

  std::vector<HeuristicPayoffTable> tables;
  nlohmann::json echo;
  std::uint64_t master = 1;
  if (const auto path = s.text("hpt_file")) {
    tables = parse_hpt_csv(read_text_file(*path));
    echo["hpt_file"] = *path;
    ensure_directory(dir);
  } else {
    SimConfig sim;
    sim.rounds = 2000;
    sim = sim_config_from(s, sim);
    const std::size_t m = s.count("agents").value_or(10);
    if (m < 2) throw bad(*s.find("agents"), "the meta-game needs at least 2 agents");
    const std::size_t reps = s.count("reps", 1).value_or(10);
    const auto p_values = probability_grid(s, "0:1:0.1");
    sim.n_builders = m;  // validated with the full agent count; profiles re-split it
    sim.n_searchers = 0;
    sim.record_rounds = false;
    sim.snapshot_every = 0;
    sim.validate(true);
    ensure_directory(dir);
    master = sim.seed;
    for (std::size_t i = 0; i < p_values.size(); ++i) {
      SimConfig at = sim;
      at.conflict_probability = p_values[i];
      at.seed = derive_seed(master, i);
      tables.push_back(estimate_hpt(m, at, reps, jobs));
    }
    echo = sim_json(sim);
    echo.erase("builders");
    echo.erase("searchers");
    echo["agents"] = m;
    echo["pc"] = p_values;
    echo["reps"] = reps;
  }

  std::vector<AlphaRankRow> rows;
  for (const auto& t : tables) {
    const std::size_t population = s.count("population", 2).value_or(t.m);
    for (const auto& r : intensity_sweep(t, alphas, population, model))
      rows.push_back({t.conflict_probability, r});
  }
  echo["alpha"] = alphas;
  echo["fixation"] = model == FixationModel::OneMutant ? "one-mutant" : "full-profile";
  echo["jobs"] = jobs;

  RunManifest manifest("egta", master, echo.dump());
  if (!s.has("hpt_file")) manifest.write_output(dir, "hpt.csv", hpt_csv(tables), kHptSchema);
  manifest.write_output(dir, "alpharank.csv", alpharank_csv(rows), kAlphaRankSchema);
  manifest.finish(dir, seconds_since(start));

  fmt::print("egta: nu(sharing) at alpha = {}\n", alphas.back());
  for (const auto& r : rows)
    if (r.result.alpha == alphas.back())
      fmt::print("  p_C {:<4} {:.4f}\n", r.conflict_probability, r.result.stationary(kSharing));
  fmt::print("-> {}\n", dir.string());
  return 0;
}

int cmd_verify_analytic(const Settings& s) {
  const auto start = std::chrono::steady_clock::now();
  VerificationConfig cfg;
  if (auto v = s.count("points", 1)) cfg.sign_points = *v;
  if (auto v = s.count("mc_points")) cfg.mc_points = *v;
  if (auto v = s.count("mc_samples", 2)) cfg.mc_samples = *v;
  if (auto v = s.count("fd_points")) cfg.fd_points = *v;
  if (auto v = s.real("fd_step")) {
    if (!(*v > 0.0 && *v < 0.25)) throw bad(*s.find("fd_step"), "fd_step must lie in (0, 0.25)");
    cfg.fd_step = *v;
  }
  if (auto v = s.seed("seed")) cfg.seed = *v;
  const auto dir = output_directory(s);
  ensure_directory(dir);

  const auto report = verify_analytic(cfg);
  nlohmann::json echo = {{"points", cfg.sign_points},   {"mc_points", cfg.mc_points},
                         {"mc_samples", cfg.mc_samples}, {"fd_points", cfg.fd_points},
                         {"fd_step", cfg.fd_step},       {"seed", cfg.seed}};
  RunManifest manifest("verify-analytic", cfg.seed, echo.dump());
  manifest.write_output(dir, "verify_analytic.json", report.to_json() + "\n", kVerifySchema);
  manifest.finish(dir, seconds_since(start));

  const auto negative = report.negative_signs();
  fmt::print("verify-analytic: derivative negative at {}/{} points; MC within 3 sigma at {}/{}; "
             "max FD relative error {:.3e} -> {}\n",
             negative, report.signs.size(), report.mc_within(3.0), report.mc.size(),
             report.max_fd_relative_error(), dir.string());
  if (negative != report.signs.size()) {
    fmt::print(stderr, "error: derivative sign check failed\n");
    return 4;
  }
  return 0;
}

// ---------------------------------------------------------------- CLI

namespace {

struct OptionBinding {
  std::string key;
  CLI::Option* option = nullptr;
  std::string value;
};

class Bindings {
 public:
  void add(CLI::App* app, const std::string& key, const std::string& help) {
    auto& b = items_.emplace_back(std::make_unique<OptionBinding>());
    b->key = key;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    b->option = app->add_option(flag, b->value, help);
  }
  void add_flag(CLI::App* app, const std::string& key, const std::string& help) {
    auto& b = items_.emplace_back(std::make_unique<OptionBinding>());
    b->key = key;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    b->value = "true";
    b->option = app->add_flag(flag, help);
  }
  Settings collect() const {
    Settings s;
    for (const auto& b : items_)
      if (b->option->count() > 0) s.set(b->key, b->value, b->option->get_name());
    return s;
  }

 private:
  std::vector<std::unique_ptr<OptionBinding>> items_;
};

void add_market_options(CLI::App* app, Bindings& b) {
  b.add(app, "lambda", "rate of the exponential bundle values (default 10)");
  b.add(app, "temperature", "softmax temperature T (default 2)");
  b.add(app, "eta", "fitness learning rate (default 0.5)");
  b.add(app, "trigger", "per-agent GA trigger probability per round (default 0.01)");
  b.add(app, "elimination", "fraction of each pool replaced by the GA (default 0.5)");
  b.add(app, "mutation", "bit-flip probability for offspring (default 0.01)");
  b.add(app, "capacity", "block capacity in bundles or 'unbounded' (default)");
  b.add(app, "seed", "master seed (default 1)");
  b.add(app, "rounds", "rounds per simulation");
  b.add(app, "out", "output directory (default $ROLESIM_OUT_DIR or rolesim-out)");
}

int dispatch(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const IoError& e) {
    fmt::print(stderr, "io error: {}\n", e.what());
    return 3;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "io error: {}\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Agent-based simulator of block-building auctions with co-evolving strategies",
               "rolesim"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  Bindings b;

  auto* sim = app.add_subcommand("simulate", "run one co-evolving market");
  sim->add_option("--config", config_path, "YAML settings file (flags take precedence)");
  b.add(sim, "builders", "number of builders (default 10)");
  b.add(sim, "searchers", "number of searchers (default 10)");
  b.add(sim, "pc", "conflict probability (default 0.8)");
  b.add(sim, "ma_window", "moving-average window in rounds (default 200)");
  b.add(sim, "snapshot_every", "write pool snapshots every N rounds (0: final only)");
  b.add_flag(sim, "rounds_csv", "also write the per-round, per-agent rounds.csv");
  add_market_options(sim, b);

  auto* sweep = app.add_subcommand("sweep", "replicate the market over a conflict grid");
  sweep->add_option("--config", config_path, "YAML settings file (flags take precedence)");
  b.add(sweep, "builders", "number of builders (default 5)");
  b.add(sweep, "searchers", "number of searchers (default 5)");
  b.add(sweep, "pc", "conflict grid, e.g. 0:1:0.1 or 0,0.5,1 (default 0:1:0.1)");
  b.add(sweep, "reps", "repetitions per conflict probability (default 10)");
  b.add(sweep, "jobs", "parallel replicas (default: hardware threads)");
  add_market_options(sweep, b);

  auto* egta = app.add_subcommand("egta", "meta-game over the building and sharing roles");
  egta->add_option("--config", config_path, "YAML settings file (flags take precedence)");
  b.add(egta, "agents", "agents in the meta-game (default 10)");
  b.add(egta, "pc", "conflict grid (default 0:1:0.1)");
  b.add(egta, "alpha", "selection intensity grid (default 0.1:100:log30)");
  b.add(egta, "reps", "simulations per profile (default 10)");
  b.add(egta, "jobs", "parallel simulations (default: hardware threads)");
  b.add(egta, "population", "population size in the fixation formula (default: agents)");
  b.add(egta, "fixation", "one-mutant (default) or full-profile");
  b.add(egta, "hpt_file", "skip simulation and rank an existing hpt.csv");
  add_market_options(egta, b);

  auto* verify = app.add_subcommand("verify-analytic", "check the two-builder closed form");
  verify->add_option("--config", config_path, "YAML settings file (flags take precedence)");
  b.add(verify, "points", "random points for the derivative sign check (default 1000)");
  b.add(verify, "mc_points", "points compared against Monte Carlo (default 50)");
  b.add(verify, "mc_samples", "Monte Carlo samples per point (default 1e6)");
  b.add(verify, "fd_points", "points compared against finite differences (default 100)");
  b.add(verify, "fd_step", "finite-difference step (default 1e-5)");
  b.add(verify, "seed", "seed of the random grids (default 1)");
  b.add(verify, "out", "output directory (default $ROLESIM_OUT_DIR or rolesim-out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  return dispatch([&]() -> int {
    Settings s;
    if (!config_path.empty()) s = load_settings_file(config_path);
    s.merge(b.collect());
    if (sim->parsed()) return cmd_simulate(s);
    if (sweep->parsed()) return cmd_sweep(s);
    if (egta->parsed()) return cmd_egta(s);
    return cmd_verify_analytic(s);
  });
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("rolesim");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : storage) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace rolesim
