// Command-line driver: pool / select / trial / sweep / report.

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bdris/bdris.hpp"

namespace {

using namespace bdris;

struct ConfigOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seed;
  int group_size = 0;
  int trp_count = 0;
  std::string noise_dbm;
  std::string scheme;
  int trials = 0;
  int workers = -1;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "INI run configuration")->check(CLI::ExistingFile);
    app->add_option("--set", overrides, "Override a config key, section.key=value (repeatable)");
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--group-size", group_size, "BD-RIS group size N0");
    app->add_option("--trp-count", trp_count, "Number of TRPs D");
    app->add_option("--noise-dbm", noise_dbm, "Measurement noise power in dBm (-inf = noiseless)");
    app->add_option("--scheme", scheme, "TRP selection: greedy|random");
    app->add_option("--trials", trials, "Monte Carlo trials L");
    app->add_option("--workers", workers, "Concurrent trials (0 = all cores)");
  }

  RunConfig build() const {
    boost::property_tree::ptree tree;
    if (!config_path.empty()) tree = load_config_tree(config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw InvalidInput("--set expects section.key=value, got '" + o + "'");
      set_config_value(tree, o.substr(0, eq), o.substr(eq + 1));
    }
    if (!seed.empty()) tree.put("experiment.seed", seed);
    if (group_size) tree.put("bdris.group_size", group_size);
    if (trp_count) tree.put("selection.trp_count", trp_count);
    if (!noise_dbm.empty()) tree.put("measurement.noise_power_dbm", noise_dbm);
    if (!scheme.empty()) tree.put("selection.scheme", scheme);
    if (trials) tree.put("experiment.monte_carlo_trials", trials);
    if (workers >= 0) tree.put("experiment.workers", workers);
    return run_config_from_tree(tree);
  }
};

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InvalidInput("not a number in value list: '" + tok + "'");
    }
  }
  return out;
}

void print_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << std::left << std::setw(6) << "N0" << std::setw(8) << "D" << std::setw(12) << "noise_dBm"
      << std::setw(9) << "scheme" << std::setw(7) << "L" << std::setw(14) << "mean_nmse"
      << std::setw(14) << "std_nmse" << "mean_nmse_dB\n";
  for (const auto& r : rows) {
    std::ostringstream noise;
    noise << r.noise_power_dbm;
    out << std::left << std::setw(6) << r.group_size << std::setw(8) << r.trp_count << std::setw(12)
        << noise.str() << std::setw(9) << to_string(r.selection_scheme) << std::setw(7) << r.trials
        << std::setw(14) << std::setprecision(6) << r.mean_nmse << std::setw(14) << r.std_nmse
        << std::setprecision(4) << 10.0 * std::log10(r.mean_nmse) << '\n';
  }
}

void write_rows(const std::vector<ResultRow>& rows, const std::string& path) {
  if (path.empty() || path == "-") write_results(std::cout, rows);
  else emit_results(rows, path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BD-RIS channel estimation from received-power measurements"};
  app.require_subcommand(1);

  // pool
  auto* pool_cmd = app.add_subcommand("pool", "Build and save a candidate TRP pool");
  int pool_n = 4, pool_n0 = 2, pool_size = 0;
  double pool_z0 = 50.0;
  std::string pool_seed = "1", pool_out;
  pool_cmd->add_option("--n-elements", pool_n, "BD-RIS elements N");
  pool_cmd->add_option("--group-size", pool_n0, "Group size N0");
  pool_cmd->add_option("--impedance-ohm", pool_z0, "Reference impedance Z0");
  pool_cmd->add_option("--size", pool_size, "Candidate count C")->required();
  pool_cmd->add_option("--seed", pool_seed, "Seed");
  pool_cmd->add_option("-o,--out", pool_out, "Output pool file")->required();

  // select
  auto* select_cmd = app.add_subcommand("select", "Select TRPs from a saved pool");
  std::string select_pool, select_out, select_scheme = "greedy", select_seed = "1";
  int select_count = 0;
  select_cmd->add_option("--pool", select_pool, "Pool file")->required()->check(CLI::ExistingFile);
  select_cmd->add_option("--count", select_count, "Number of TRPs D")->required();
  select_cmd->add_option("--scheme", select_scheme, "greedy|random");
  select_cmd->add_option("--seed", select_seed, "Seed for random selection");
  select_cmd->add_option("-o,--out", select_out, "Output TRP set file")->required();

  // trial
  auto* trial_cmd = app.add_subcommand("trial", "Run one estimation trial");
  ConfigOptions trial_opts;
  trial_opts.attach(trial_cmd);
  int trial_index = 0;
  std::string trial_trps, trial_out, trial_history;
  bool trial_dump = false;
  trial_cmd->add_option("--trial-index", trial_index, "Trial index l (selects the trial seed)");
  trial_cmd->add_option("--trps", trial_trps, "Use a saved TRP set instead of pool + selection")
      ->check(CLI::ExistingFile);
  trial_cmd->add_option("-o,--out", trial_out, "Result CSV (default stdout)");
  trial_cmd->add_option("--history", trial_history, "Write the training history CSV");
  trial_cmd->add_flag("--dump-config", trial_dump, "Print the effective configuration and exit");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep over one parameter");
  ConfigOptions sweep_opts;
  sweep_opts.attach(sweep_cmd);
  std::string sweep_axis, sweep_values, sweep_schemes, sweep_out;
  bool sweep_dump = false;
  sweep_cmd->add_option("--axis", sweep_axis, "trp_count|noise_power|group_size")->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated axis values")->required();
  sweep_cmd->add_option("--schemes", sweep_schemes, "Comma-separated selection schemes");
  sweep_cmd->add_option("-o,--out", sweep_out, "Result CSV (default stdout)");
  sweep_cmd->add_flag("--dump-config", sweep_dump, "Print the effective configuration and exit");

  // report
  auto* report_cmd = app.add_subcommand("report", "Aggregate result CSVs into mean/std NMSE");
  std::vector<std::string> report_inputs;
  report_cmd->add_option("inputs", report_inputs, "Result CSV files")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*pool_cmd) {
      const auto cfg = BdRisConfig::from_group_size(pool_n, pool_n0, pool_z0);
      Rng rng(parse_seed(pool_seed));
      save_pool(build_pool(cfg, pool_size, rng), pool_out);
      std::cerr << "wrote " << pool_size << " TRPs of length " << cfg.trp_length() << " to " << pool_out << '\n';
    } else if (*select_cmd) {
      const auto pool = load_pool(select_pool);
      Rng rng(parse_seed(select_seed));
      const auto set = select_trps(pool, select_count, parse_selection_scheme(select_scheme), rng);
      save_trp_set(set, select_out);
      std::cerr << "selected " << set.size() << " of " << pool.pool_size() << " TRPs";
      if (set.size() >= 2) std::cerr << ", max |corr| = " << max_pairwise_correlation(set);
      std::cerr << '\n';
    } else if (*trial_cmd) {
      const RunConfig cfg = trial_opts.build();
      if (trial_dump) {
        write_run_config(std::cout, cfg);
        return 0;
      }
      TrpSet fixed;
      if (!trial_trps.empty()) fixed = load_trp_set(trial_trps);
      auto outcome = run_trial_detailed(cfg, trial_seed(cfg.master_seed, trial_index),
                                        trial_trps.empty() ? nullptr : &fixed);
      outcome.row.trial = trial_index;
      write_rows({outcome.row}, trial_out);
      if (!trial_history.empty()) write_history_csv(outcome.training, trial_history);
    } else if (*sweep_cmd) {
      const RunConfig cfg = sweep_opts.build();
      if (sweep_dump) {
        write_run_config(std::cout, cfg);
        return 0;
      }
      std::vector<SelectionScheme> schemes;
      std::stringstream ss(sweep_schemes);
      for (std::string tok; std::getline(ss, tok, ',');) schemes.push_back(parse_selection_scheme(tok));
      const auto rows = sweep(cfg, parse_sweep_axis(sweep_axis), parse_values(sweep_values), schemes);
      write_rows(rows, sweep_out);
      if (!sweep_out.empty() && sweep_out != "-") print_summary(std::cout, summarize(rows));
    } else if (*report_cmd) {
      std::vector<ResultRow> rows;
      for (const auto& path : report_inputs) {
        auto part = read_results(path);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      print_summary(std::cout, summarize(rows));
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
