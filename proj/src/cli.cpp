#include "mdf/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mdf/optsize.hpp"
#include "mdf/procedures.hpp"
#include "mdf/pvalues.hpp"
#include "mdf/serialize.hpp"
#include "mdf/simlab.hpp"

namespace mdf::cli {

namespace {

// Invalid flags or config content.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + path + "'");
  file << text;
}

void write_json(const std::string& path, const Json& doc, std::ostream& out) {
  write_text(path, doc.dump(2) + "\n", out);
}

void require_input(const CliConfig& config) {
  if (config.input_path.empty()) throw ConfigError("--input is required");
}

void require_level(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("--q must lie in [0,1]");
}

void require_a1_to_a3(const SizeFamily& family) {
  const ValidationReport report = validate_family(family);
  if (!report.a1_to_a3_pass()) {
    throw ConfigError("size family fails " + to_string(report.worst_violation.condition) +
                      "; dagger and star need a family satisfying A1-A3");
  }
}

std::optional<std::uint64_t> env_seed() {
  const char* text = std::getenv("MDF_SEED");
  if (text == nullptr || *text == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(text, &end, 10);
  if (*end != '\0') throw ConfigError("MDF_SEED must be an unsigned integer");
  return value;
}

// Runs `body`, mapping exceptions onto the exit-code contract.
template <typename Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const OptimizerError& e) {
    err << "error: " << e.what() << "\n";
    return kOptimizerFailed;
  } catch (const RefusedConfig& e) {
    err << "refused: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

std::vector<double> default_grid(std::size_t n) {
  // Geometric from 1e-4 to 0.99: small budgets are where the levels of interest live.
  std::vector<double> grid(n);
  const double lo = std::log(1e-4);
  const double hi = std::log(0.99);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  grid.back() = 0.99;
  return grid;
}

}  // namespace

int cmd_test(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_input(config);
    const double q = config.q.value_or(0.05);
    require_level(q);
    const Procedure procedure = parse_procedure(config.procedure.value_or("dagger"));
    if (config.emit_plot_data && config.output_path.empty()) {
      throw ConfigError("--emit-plot-data needs --output (the curve goes to <output>.plot.csv)");
    }
    std::ifstream in(config.input_path);
    if (!in) throw ConfigError("cannot open '" + config.input_path + "'");
    const TestBattery battery = read_battery_csv(in);
    const SizeFamily family = resolve_sizes(config.sizes.value_or("sidak"), battery.size());
    if (procedure == Procedure::Dagger || procedure == Procedure::Star) require_a1_to_a3(family);

    const ProcedureOutcome outcome = reject(procedure, battery, family, q);
    write_json(config.output_path, to_json(outcome), out);

    if (config.emit_plot_data) {
      const std::vector<double> p = battery.pvalues();
      std::ostringstream csv;
      csv << "q,J\n";
      for (int i = 1; i <= 250; ++i) {
        const double level = i / 1000.0;
        csv << Json(level).dump() << ',' << decide(procedure, p, family, level).J << '\n';
      }
      write_text(config.output_path + ".plot.csv", csv.str(), out);
    }
    return static_cast<int>(kSuccess);
  });
}

int cmd_simulate(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_input(config);
    if (config.emit_plot_data && config.output_path.empty()) {
      throw ConfigError("--emit-plot-data needs --output (replicates go to <output>.replicates.csv)");
    }
    Json doc = read_json_file(config.input_path);
    if (doc.is_object() && !doc.contains("seed")) {
      if (const auto seed = env_seed()) doc["seed"] = *seed;
    }
    SimConfig sim = sim_config_from_json(doc);
    if (config.q) sim.q = *config.q;
    if (config.procedure) sim.procedure = parse_procedure(*config.procedure);
    if (config.sizes) sim.size_family = resolve_sizes(*config.sizes, sim.M);
    if (config.seed) sim.seed = *config.seed;
    if (config.k_sigma) sim.k_sigma = *config.k_sigma;
    validate_config(sim);

    RunOptions options;
    options.workers = config.threads;
    options.keep_replicates = config.emit_plot_data;
    const SimResult result = run_experiment(sim, options);
    write_json(config.output_path, to_json(result), out);
    if (config.emit_plot_data) {
      std::ostringstream csv;
      write_replicates_csv(csv, result.replicate_counts);
      write_text(config.output_path + ".replicates.csv", csv.str(), out);
    }
    return static_cast<int>(check_bounds(result, sim.q, sim.k_sigma) ? kSuccess : kBoundFailed);
  });
}

int cmd_optimize(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_input(config);
    const Json doc = read_json_file(config.input_path);
    std::vector<double> thetas;
    std::vector<double> grid;
    FamilyOptions options;
    try {
      thetas = doc.at("thetas").get<std::vector<double>>();
      if (doc.contains("grid")) {
        grid = doc.at("grid").get<std::vector<double>>();
      } else {
        grid = default_grid(doc.value("grid_size", std::size_t{100}));
      }
      options.repair_budget = doc.value("repair_budget", options.repair_budget);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed optimizer config: ") + e.what());
    }
    const RocModel roc(std::move(thetas));
    const OptimalFamily built = build_optimal_family(roc, grid, options);
    const ValidationReport report = validate_family(built.family, config.grid_size,
                                                    config.k_max, config.tol);

    Json result;
    result["family"] = to_json(built.family);
    result["validation"] = to_json(report);
    result["max_repair"] = built.max_repair;
    Json solutions = Json::array();
    for (const WeightSolution& s : built.solutions) solutions.push_back(to_json(s));
    result["solutions"] = std::move(solutions);
    write_json(config.output_path, result, out);
    return static_cast<int>(report.a1_to_a3_pass() ? kSuccess : kValidationFailed);
  });
}

int cmd_validate(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_input(config);
    const SizeFamily family = read_family_file(config.input_path);
    if (config.k_max > family.size()) throw ConfigError("--k-max exceeds M");
    if (config.grid_size < 2) throw ConfigError("--grid-size must be at least 2");
    const ValidationReport report =
        validate_family(family, config.grid_size, config.k_max, config.tol);
    write_json(config.output_path, to_json(report), out);
    return static_cast<int>(report.a1_to_a3_pass() ? kSuccess : kValidationFailed);
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple decision functions with FWER and FDR control"};
  app.require_subcommand(1);
  CliConfig config;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", config.input_path, "Input file");
    sub->add_option("--output", config.output_path, "Output file (default: stdout)");
    sub->add_option("--q", config.q, "Level q in [0,1]");
    sub->add_option("--procedure", config.procedure, "dagger | star | holm-sidak | bh");
    sub->add_option("--sizes", config.sizes, "Size family: sidak, bonferroni or a JSON file");
    sub->add_option("--seed", config.seed, "Random seed (fallback: MDF_SEED)");
    sub->add_option("--k-sigma", config.k_sigma, "Tolerance in standard errors for bound checks");
    sub->add_flag("--emit-plot-data", config.emit_plot_data, "Also write CSV data for plots");
  };

  CLI::App* test = app.add_subcommand("test", "Run a procedure on a CSV of p-values");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo check of FWER/FDR control");
  CLI::App* optimize = app.add_subcommand("optimize", "Build a power-optimal size family");
  CLI::App* validate = app.add_subcommand("validate-sizes", "Check conditions A1-A4 of a family");
  for (CLI::App* sub : {test, simulate, optimize, validate}) add_common(sub);
  simulate->add_option("--threads", config.threads, "Worker threads (default: all)");
  for (CLI::App* sub : {optimize, validate}) {
    sub->add_option("--grid-size", config.grid_size, "Validation grid size");
    sub->add_option("--k-max", config.k_max, "Largest null count checked for A4 (default: M)");
    sub->add_option("--tol", config.tol, "Validation tolerance");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  if (!config.seed) {
    try {
      // Only simulate reads a config file that can carry its own seed.
      if (!simulate->parsed()) config.seed = env_seed();
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << "\n";
      return kConfigError;
    }
  }

  if (test->parsed()) return cmd_test(config, out, err);
  if (simulate->parsed()) return cmd_simulate(config, out, err);
  if (optimize->parsed()) return cmd_optimize(config, out, err);
  return cmd_validate(config, out, err);
}

}  // namespace mdf::cli
