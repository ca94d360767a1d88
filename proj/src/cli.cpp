#include "expmart/cli.hpp"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "expmart/characteristics.hpp"
#include "expmart/conditions.hpp"
#include "expmart/errors.hpp"

namespace expmart {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kCommands = {"check-conditions", "cumulant-table", "simulate",    "test-martingale",
                                            "price-call",       "libor-check",    "libor-build", "price-caplet"};

struct Outputs {
  std::string sha;
  std::map<std::string, std::string> files;  // name -> contents
  Verdict worst = Verdict::Pass;

  std::ostringstream& open(const std::string& name, const std::string& header) {
    auto& os = streams[name];
    os << "# config_sha=" << sha << "\n" << header << "\n";
    return os;
  }
  void note(Verdict v) {
    if (v == Verdict::Fail) worst = Verdict::Fail;
    if (v == Verdict::Indeterminate && worst == Verdict::Pass) worst = Verdict::Indeterminate;
  }
  std::map<std::string, std::ostringstream> streams;
};

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return kExitPass;
    case Verdict::Fail:
      return kExitFail;
    case Verdict::Indeterminate:
      return kExitIndeterminate;
  }
  return kExitIndeterminate;
}

void add_condition(Outputs& o, std::ostream& out, const ConditionReport& r) {
  auto it = o.streams.find("conditions.csv");
  std::ostream& os = it == o.streams.end() ? o.open("conditions.csv", "condition,horizon,value,bound,verdict")
                                           : static_cast<std::ostream&>(it->second);
  os << csv_row(r) << "\n";
  out << to_string(r.id) << " on [0, " << format_number(r.horizon) << "]: " << format_number(r.value) << " -> "
      << to_string(r.verdict);
  if (!r.diagnostics.empty()) out << "  (" << r.diagnostics << ")";
  out << "\n";
  o.note(r.verdict);
}

void add_test(Outputs& o, std::ostream& out, const TestReport& r) {
  auto it = o.streams.find("tests.csv");
  std::ostream& os = it == o.streams.end() ? o.open("tests.csv", "quantity,estimate,stderr,z,verdict")
                                           : static_cast<std::ostream&>(it->second);
  os << csv_row(r) << "\n";
  out << r.quantity << ": " << format_number(r.estimate) << " +- " << format_number(r.std_error)
      << " z=" << format_number(r.z) << " -> " << to_string(r.verdict) << "\n";
  o.note(r.verdict);
}

void add_price(Outputs& o, std::ostream& out, const std::string& name, const Price& p) {
  auto it = o.streams.find("prices.csv");
  std::ostream& os = it == o.streams.end() ? o.open("prices.csv", "quantity,estimate,stderr,n_paths")
                                           : static_cast<std::ostream&>(it->second);
  os << name << "," << format_number(p.price) << "," << format_number(p.std_error) << "," << p.n_paths << "\n";
  out << name << ": " << format_number(p.price) << " +- " << format_number(p.std_error) << "\n";
}

SimulationOptions sim_options(const RunConfig& rc) {
  SimulationOptions s;
  s.epsilon = rc.config.get_double("sim.epsilon", s.epsilon);
  s.max_jump_rate = rc.config.get_double("sim.max_jump_rate", s.max_jump_rate);
  s.threads = rc.threads;
  return s;
}

void need_paths(const RunConfig& rc) {
  if (rc.n_paths < 100) {
    throw ConfigError("n_paths = " + std::to_string(rc.n_paths) + " is below the floor of 100 paths");
  }
}

// ---------------------------------------------------------------------------

void cmd_check_conditions(const RunConfig& rc, Outputs& o, std::ostream& out) {
  const Config& cfg = rc.config;
  const CharacteristicTriplet tr = triplet_from_config(cfg);
  const double T = cfg.get_double("T", tr.horizon());
  const StrategyPath s = cfg.has("lambda") ? strategy_from_config(cfg, "lambda", tr.dim())
                                           : StrategyPath::constant(Vec::Ones(tr.dim()));
  std::optional<double> kappa;
  if (cfg.has("kappa")) kappa = cfg.get_double("kappa");
  const std::vector<std::string> names = cfg.has("conditions") ? cfg.get_words("conditions")
                                                               : std::vector<std::string>{"B1"};
  for (const auto& name : names) {
    ConditionId id;
    try {
      id = parse_condition_id(name);
    } catch (const std::invalid_argument&) {
      throw ConfigError(cfg.where("conditions") + ": unknown condition '" + name + "'");
    }
    switch (id) {
      case ConditionId::EXPSPEC:
        add_condition(o, out, check_exponentially_special(tr, s, T, rc.quad));
        break;
      case ConditionId::LEVYINT:
        add_condition(o, out, check_levy_integrability(tr.levy(), rc.quad));
        break;
      case ConditionId::PIIAC:
        add_condition(o, out, check_piiac_integrability(tr, T, rc.quad));
        break;
      case ConditionId::A1:
      case ConditionId::A2:
      case ConditionId::B1:
      case ConditionId::B2:
      case ConditionId::C1:
      case ConditionId::C2:
        add_condition(o, out, check_condition(tr, s, T, id, kappa, rc.quad));
        break;
      default:
        throw ConfigError(cfg.where("conditions") + ": '" + name + "' belongs to libor-check");
    }
  }
  if (cfg.get_string("classify", "no") == "yes") {
    out << "classification: " << to_string(pii_martingale_classification(tr, s, rc.quad)) << "\n";
  }
}

void cmd_cumulant_table(const RunConfig& rc, Outputs& o, std::ostream& out) {
  const Config& cfg = rc.config;
  const CharacteristicTriplet tr = triplet_from_config(cfg);
  const double T = cfg.get_double("T", tr.horizon());
  const StrategyPath s = strategy_from_config(cfg, "lambda", tr.dim());
  const TimeGrid grid = TimeGrid::uniform(T, rc.steps);
  const CumulantPath K = cumulant_process(tr, s, grid.nodes, rc.quad);
  auto& os = o.open("cumulant.csv", "t,drift,diffusion,jump,K");
  for (std::size_t i = 0; i < K.grid.size(); ++i) {
    const auto& p = K.parts[i];
    os << format_number(K.grid[i]) << "," << format_number(p.drift) << "," << format_number(p.diffusion) << ","
       << format_number(p.jump) << "," << format_number(K.values[i]) << "\n";
  }
  out << "K_T = " << format_number(K.terminal()) << " at T = " << format_number(T) << "\n";
}

void cmd_simulate(const RunConfig& rc, Outputs& o, std::ostream& out) {
  const Config& cfg = rc.config;
  need_paths(rc);
  const CharacteristicTriplet tr = triplet_from_config(cfg);
  const double T = cfg.get_double("T", tr.horizon());
  const PathEnsemble ens = simulate_piiac(tr, TimeGrid::uniform(T, rc.steps), rc.n_paths, rc.seed, sim_options(rc));
  const auto max_paths = static_cast<std::size_t>(cfg.get_int("export_paths", static_cast<long>(rc.n_paths)));
  auto& os = o.streams["ensemble.csv"];
  os << "# config_sha=" << o.sha << "\n";
  write_ensemble_csv(os, ens, max_paths);
  out << "scheme: " << to_string(ens.scheme().kind) << ", " << ens.n_paths() << " paths, " << ens.steps()
      << " steps\n";
}

void cmd_test_martingale(const RunConfig& rc, Outputs& o, std::ostream& out) {
  const Config& cfg = rc.config;
  need_paths(rc);
  const CharacteristicTriplet tr = triplet_from_config(cfg);
  const double T = cfg.get_double("T", tr.horizon());
  const StrategyPath s = strategy_from_config(cfg, "lambda", tr.dim());
  const TimeGrid grid = TimeGrid::uniform(T, rc.steps);
  const CumulantPath K = cumulant_process(tr, s, grid.nodes, rc.quad);
  const PathEnsemble ens = simulate_piiac(tr, grid, rc.n_paths, rc.seed, sim_options(rc));
  const MartingalePaths M = exponential_martingale_paths(ens, s, K);
  add_test(o, out, mc_martingale_test(M, T));
}

void cmd_price_call(const RunConfig& rc, Outputs& o, std::ostream& out) {
  const Config& cfg = rc.config;
  need_paths(rc);
  const AssetModel m = AssetModel::create(asset_spec_from_config(cfg));
  const double K = cfg.get_double("asset.strike");
  const ConditionReport rn = check_risk_neutral(m, rc.quad);
  add_condition(o, out, rn);
  if (!rn.passed()) {
    out << "price_call_numeraire refused: risk-neutral condition not certified\n";
    return;
  }
  const TimeGrid grid = TimeGrid::uniform(m.spec().maturity, rc.steps);
  const PathEnsemble ens = simulate_piiac(m.driver(), grid, rc.n_paths, rc.seed, sim_options(rc));
  add_price(o, out, "call_direct", price_call_direct(m, K, ens));
  add_price(o, out, "call_numeraire", price_call_numeraire(m, K, ens));
}

LiborModel libor_model(const RunConfig& rc) {
  try {
    return LiborModel::create(libor_spec_from_config(rc.config));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void cmd_libor_check(const RunConfig& rc, Outputs& o, std::ostream& out) {
  const Config& cfg = rc.config;
  const LiborModel m = libor_model(rc);
  add_condition(o, out, validate_vol_spec(m.vols(), m.tenor(), m.driver(), cfg.get_double("vol.eps", 0.01),
                                          m.vols().bound(), rc.quad));
  add_condition(o, out, check_SL(m, rc.quad));
  if (cfg.has("libor.N")) add_condition(o, out, check_levy_libor_bound(m, cfg.get_double("libor.N"), rc.quad));
}

LiborPaths libor_paths(const RunConfig& rc, const LiborModel& m) {
  const TimeGrid grid = libor_grid(m, rc.steps);
  const PathEnsemble ens = simulate_piiac(m.driver(), grid, rc.n_paths, rc.seed, sim_options(rc));
  return backward_construct(m, ens);
}

void cmd_libor_build(const RunConfig& rc, Outputs& o, std::ostream& out) {
  need_paths(rc);
  const LiborModel m = libor_model(rc);
  const ConditionReport sl = check_SL(m, rc.quad);
  add_condition(o, out, sl);
  if (!sl.passed()) return;
  const LiborPaths paths = libor_paths(rc, m);
  for (int k = 1; k <= m.n() - 1; ++k) add_test(o, out, mc_forward_martingale_test(m, paths, k));
}

void cmd_price_caplet(const RunConfig& rc, Outputs& o, std::ostream& out) {
  const Config& cfg = rc.config;
  need_paths(rc);
  const LiborModel m = libor_model(rc);
  const long k = cfg.get_int("caplet.k", 1);
  if (k < 1 || k > m.n() - 1) throw ConfigError(cfg.where("caplet.k") + ": must be in 1..n-1");
  const double strike = cfg.get_double("caplet.strike", m.initial(static_cast<int>(k)));
  const ConditionReport sl = check_SL(m, rc.quad);
  add_condition(o, out, sl);
  if (!sl.passed()) return;
  const LiborPaths paths = libor_paths(rc, m);
  const TestReport t = mc_forward_martingale_test(m, paths, static_cast<int>(k));
  add_test(o, out, t);
  if (t.verdict != Verdict::Pass) return;
  add_price(o, out, "caplet_k" + std::to_string(k), price_caplet(m, paths, static_cast<int>(k), strike));
}

// ---------------------------------------------------------------------------

void commit_outputs(const RunConfig& rc, const Outputs& o) {
  fs::create_directories(rc.out_dir);
  const fs::path stage = fs::path(rc.out_dir) / (".staging-" + std::to_string(::getpid()));
  fs::remove_all(stage);
  fs::create_directories(stage);
  try {
    nlohmann::ordered_json manifest;
    manifest["config_sha"] = o.sha;
    manifest["seed"] = rc.seed;
    manifest["n_paths"] = rc.n_paths;
    manifest["grid"] = {{"steps", rc.steps}};
    manifest["command"] = rc.command;
    manifest["tool_version"] = kToolVersion;
    nlohmann::ordered_json files = nlohmann::ordered_json::object();
    for (const auto& [name, os] : o.streams) {
      const std::string body = os.str();
      std::ofstream f(stage / name, std::ios::binary);
      f << body;
      if (!f) throw std::runtime_error("cannot write " + (stage / name).string());
      files[name] = sha256_hex(body);
    }
    manifest["outputs"] = files;
    {
      std::ofstream f(stage / "manifest.json", std::ios::binary);
      f << manifest.dump(2) << "\n";
      if (!f) throw std::runtime_error("cannot write manifest");
    }
    for (const auto& [name, os] : o.streams) fs::rename(stage / name, fs::path(rc.out_dir) / name);
    fs::rename(stage / "manifest.json", fs::path(rc.out_dir) / "manifest.json");
    fs::remove_all(stage);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(stage, ec);
    throw;
  }
}

}  // namespace

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exponential martingale checks, simulation and Libor construction"};
  app.require_subcommand(1);
  RunConfig rc;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_paths, steps;
  std::optional<int> threads;
  for (const auto& name : kCommands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("config", rc.config_path, "config file")->required();
    sub->add_option("-o,--out", rc.out_dir, "output directory");
    sub->add_option("--seed", seed);
    sub->add_option("--n-paths", n_paths);
    sub->add_option("--steps", steps);
    sub->add_option("--threads", threads)->check(CLI::Range(1, 256));
  }
  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  rc.command = app.get_subcommands().front()->get_name();

  try {
    rc.config = Config::load(rc.config_path);
    const Config& cfg = rc.config;
    rc.seed = seed ? *seed : static_cast<std::uint64_t>(cfg.get_int("seed", 1));
    const long np = n_paths ? static_cast<long>(*n_paths) : cfg.get_int("n_paths", 10000);
    const long st = steps ? static_cast<long>(*steps) : cfg.get_int("steps", 256);
    if (np < 1 || st < 1) throw ConfigError("n_paths and steps must be positive");
    rc.n_paths = static_cast<std::size_t>(np);
    rc.steps = static_cast<std::size_t>(st);
    rc.threads = threads ? *threads : static_cast<int>(cfg.get_int("threads", 1));
    rc.quad = quadrature_from_config(cfg);

    Outputs o;
    o.sha = cfg.sha();
    using Handler = void (*)(const RunConfig&, Outputs&, std::ostream&);
    static const std::map<std::string, Handler> handlers = {
        {"check-conditions", cmd_check_conditions}, {"cumulant-table", cmd_cumulant_table},
        {"simulate", cmd_simulate},                 {"test-martingale", cmd_test_martingale},
        {"price-call", cmd_price_call},             {"libor-check", cmd_libor_check},
        {"libor-build", cmd_libor_build},           {"price-caplet", cmd_price_caplet}};
    int code = kExitPass;
    try {
      handlers.at(rc.command)(rc, o, out);
      code = exit_for(o.worst);
    } catch (const NotExponentiallySpecialError& e) {
      err << "condition failed: " << e.what() << "\n";
      code = kExitFail;
    } catch (const ConditionNotMetError& e) {
      err << "refused: " << e.what() << "\n";
      code = kExitFail;
    } catch (const QuadratureError& e) {
      err << "undecided: " << e.what() << "\n";
      code = kExitIndeterminate;
    }
    for (const auto& k : cfg.unused_keys()) err << "warning: unused " << cfg.where(k) << "\n";
    commit_outputs(rc, o);
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitUsage;
}

int run_command(int argc, const char* const* argv) {
  return run_command(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace expmart
