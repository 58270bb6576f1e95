#pragma once

// RunConfig <-> INI document. Every physical quantity carries its unit in the
// key name. Unknown sections or keys are rejected.
//
//   [bdris]       n_elements, group_size, reference_impedance_ohm
//   [scene]       bs_position_m, ris_position_m, user_area_min_m, user_area_max_m,
//                 user_position_m (optional), upa_ny, upa_nz, element_spacing_wavelengths
//   [channel]     ris_fading (los|rayleigh), tx_power_dbm
//   [selection]   scheme (greedy|random), pool_size (0 = 20 * trp_count), trp_count
//   [measurement] noise_power_dbm (-inf = noiseless)
//   [train]       train_fraction, max_iterations, lr_max, lr_min, cosine_period,
//                 batch_size, init_scale, normalization (mean_power|none), validation_every
//   [experiment]  monte_carlo_trials, seed, workers (0 = all cores)
//
// Vectors are three whitespace-separated numbers.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bdris/harness.hpp"

namespace bdris {

namespace config_detail {

namespace pt = boost::property_tree;

inline const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"bdris", {"n_elements", "group_size", "reference_impedance_ohm"}},
      {"scene",
       {"bs_position_m", "ris_position_m", "user_area_min_m", "user_area_max_m", "user_position_m",
        "upa_ny", "upa_nz", "element_spacing_wavelengths"}},
      {"channel", {"ris_fading", "tx_power_dbm"}},
      {"selection", {"scheme", "pool_size", "trp_count"}},
      {"measurement", {"noise_power_dbm"}},
      {"train",
       {"train_fraction", "max_iterations", "lr_max", "lr_min", "cosine_period", "batch_size",
        "init_scale", "normalization", "validation_every"}},
      {"experiment", {"monte_carlo_trials", "seed", "workers"}},
  };
  return s;
}

inline void check_schema(const pt::ptree& tree) {
  const auto& s = schema();
  for (const auto& [section, body] : tree) {
    auto it = s.find(section);
    if (it == s.end()) throw InvalidInput("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key))
        throw InvalidInput("config: unknown key '" + key + "' in [" + section + "]");
    }
  }
}

inline double to_double(const std::string& s, const std::string& key) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InvalidInput("config: '" + key + "' is not a number: '" + s + "'");
  }
  if (s.find_first_not_of(" \t", pos) != std::string::npos)
    throw InvalidInput("config: '" + key + "' is not a number: '" + s + "'");
  return v;
}

inline long long to_integer(const std::string& s, const std::string& key) {
  const double v = to_double(s, key);
  if (!std::isfinite(v) || v != std::floor(v))
    throw InvalidInput("config: '" + key + "' must be an integer: '" + s + "'");
  return static_cast<long long>(v);
}

inline Vec3 to_vec3(const std::string& s, const std::string& key) {
  std::istringstream ss(s);
  std::vector<double> parts;
  for (std::string tok; ss >> tok;) parts.push_back(to_double(tok, key));
  if (parts.size() != 3) throw InvalidInput("config: '" + key + "' needs three numbers");
  return {parts[0], parts[1], parts[2]};
}

inline std::string from_vec3(const Vec3& v) {
  std::ostringstream ss;
  ss << std::setprecision(std::numeric_limits<double>::max_digits10) << v[0] << ' ' << v[1] << ' '
     << v[2];
  return ss.str();
}

inline std::string from_double(double v) {
  std::ostringstream ss;
  ss << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return ss.str();
}

}  // namespace config_detail

inline std::uint64_t parse_seed(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (!s.empty() && s.front() == '-') throw InvalidInput("negative");
    v = std::stoull(s, &pos, 0);
  } catch (const std::exception&) {
    throw InvalidInput("seed must be a nonnegative integer: '" + s + "'");
  }
  if (pos != s.size()) throw InvalidInput("seed must be a nonnegative integer: '" + s + "'");
  return v;
}

/// Sets "section.key" to value, validating the name against the schema.
inline void set_config_value(boost::property_tree::ptree& tree, const std::string& dotted,
                             const std::string& value) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) throw InvalidInput("config override '" + dotted + "' needs section.key");
  const auto& s = config_detail::schema();
  auto it = s.find(dotted.substr(0, dot));
  if (it == s.end() || !it->second.count(dotted.substr(dot + 1)))
    throw InvalidInput("config: unknown key '" + dotted + "'");
  tree.put(dotted, value);
}

inline boost::property_tree::ptree load_config_tree(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw IoError("cannot read config '" + path + "': " + e.message());
  }
  config_detail::check_schema(tree);
  return tree;
}

/// Builds a RunConfig from `tree`; absent keys keep the desk-scale defaults.
inline RunConfig run_config_from_tree(const boost::property_tree::ptree& tree) {
  using namespace config_detail;
  check_schema(tree);
  RunConfig cfg = RunConfig::desk_scale();

  auto get = [&](const std::string& key) { return tree.get_optional<std::string>(key); };
  auto num = [&](const std::string& key, double fallback) {
    auto v = get(key);
    return v ? to_double(*v, key) : fallback;
  };
  auto integer = [&](const std::string& key, long long fallback) {
    auto v = get(key);
    return v ? to_integer(*v, key) : fallback;
  };
  auto vec = [&](const std::string& key, const Vec3& fallback) {
    auto v = get(key);
    return v ? to_vec3(*v, key) : fallback;
  };

  const int n = static_cast<int>(integer("bdris.n_elements", cfg.bdris.n_elements));
  const int n0 = static_cast<int>(integer("bdris.group_size", cfg.bdris.group_size()));
  cfg.bdris = BdRisConfig::from_group_size(
      n, n0, num("bdris.reference_impedance_ohm", cfg.bdris.reference_impedance));

  cfg.scene.bs_position = vec("scene.bs_position_m", cfg.scene.bs_position);
  cfg.scene.ris_position = vec("scene.ris_position_m", cfg.scene.ris_position);
  cfg.scene.user_area_min = vec("scene.user_area_min_m", cfg.scene.user_area_min);
  cfg.scene.user_area_max = vec("scene.user_area_max_m", cfg.scene.user_area_max);
  if (auto u = get("scene.user_position_m")) cfg.user_position = to_vec3(*u, "scene.user_position_m");
  cfg.scene.upa_dims = {static_cast<int>(integer("scene.upa_ny", cfg.scene.upa_dims[0])),
                        static_cast<int>(integer("scene.upa_nz", cfg.scene.upa_dims[1]))};
  cfg.scene.element_spacing = num("scene.element_spacing_wavelengths", cfg.scene.element_spacing);

  if (auto f = get("channel.ris_fading")) cfg.channel.ris_links = parse_fading_model(*f);
  cfg.channel.tx_power_w = dbm_to_watts(num("channel.tx_power_dbm", watts_to_dbm(cfg.channel.tx_power_w)));

  if (auto s = get("selection.scheme")) cfg.selection = parse_selection_scheme(*s);
  cfg.pool_size = static_cast<int>(integer("selection.pool_size", cfg.pool_size));
  cfg.trp_count = static_cast<int>(integer("selection.trp_count", cfg.trp_count));

  cfg.noise_power_dbm = num("measurement.noise_power_dbm", cfg.noise_power_dbm);

  auto& t = cfg.train;
  t.train_fraction = num("train.train_fraction", t.train_fraction);
  t.max_iterations = static_cast<int>(integer("train.max_iterations", t.max_iterations));
  t.lr_max = num("train.lr_max", t.lr_max);
  t.lr_min = num("train.lr_min", t.lr_min);
  t.cosine_period = static_cast<int>(integer("train.cosine_period", t.cosine_period));
  t.batch_size = static_cast<int>(integer("train.batch_size", t.batch_size));
  t.init_scale = num("train.init_scale", t.init_scale);
  if (auto m = get("train.normalization")) {
    if (*m == "mean_power") t.normalization = Normalization::mean_power;
    else if (*m == "none") t.normalization = Normalization::none;
    else throw InvalidInput("config: train.normalization must be mean_power|none");
  }
  t.validation_every = static_cast<int>(integer("train.validation_every", t.validation_every));

  cfg.monte_carlo_trials = static_cast<int>(integer("experiment.monte_carlo_trials", cfg.monte_carlo_trials));
  if (auto seed = get("experiment.seed")) cfg.master_seed = parse_seed(*seed);
  cfg.workers = static_cast<int>(integer("experiment.workers", cfg.workers));

  cfg.validate();
  return cfg;
}

inline boost::property_tree::ptree run_config_to_tree(const RunConfig& cfg) {
  using namespace config_detail;
  boost::property_tree::ptree t;
  t.put("bdris.n_elements", cfg.bdris.n_elements);
  t.put("bdris.group_size", cfg.bdris.group_size());
  t.put("bdris.reference_impedance_ohm", from_double(cfg.bdris.reference_impedance));
  t.put("scene.bs_position_m", from_vec3(cfg.scene.bs_position));
  t.put("scene.ris_position_m", from_vec3(cfg.scene.ris_position));
  t.put("scene.user_area_min_m", from_vec3(cfg.scene.user_area_min));
  t.put("scene.user_area_max_m", from_vec3(cfg.scene.user_area_max));
  if (cfg.user_position) t.put("scene.user_position_m", from_vec3(*cfg.user_position));
  t.put("scene.upa_ny", cfg.scene.upa_dims[0]);
  t.put("scene.upa_nz", cfg.scene.upa_dims[1]);
  t.put("scene.element_spacing_wavelengths", from_double(cfg.scene.element_spacing));
  t.put("channel.ris_fading", to_string(cfg.channel.ris_links));
  t.put("channel.tx_power_dbm", from_double(watts_to_dbm(cfg.channel.tx_power_w)));
  t.put("selection.scheme", to_string(cfg.selection));
  t.put("selection.pool_size", cfg.pool_size);
  t.put("selection.trp_count", cfg.trp_count);
  t.put("measurement.noise_power_dbm", from_double(cfg.noise_power_dbm));
  t.put("train.train_fraction", from_double(cfg.train.train_fraction));
  t.put("train.max_iterations", cfg.train.max_iterations);
  t.put("train.lr_max", from_double(cfg.train.lr_max));
  t.put("train.lr_min", from_double(cfg.train.lr_min));
  t.put("train.cosine_period", cfg.train.cosine_period);
  t.put("train.batch_size", cfg.train.batch_size);
  t.put("train.init_scale", from_double(cfg.train.init_scale));
  t.put("train.normalization",
        cfg.train.normalization == Normalization::mean_power ? "mean_power" : "none");
  t.put("train.validation_every", cfg.train.validation_every);
  t.put("experiment.monte_carlo_trials", cfg.monte_carlo_trials);
  t.put("experiment.seed", cfg.master_seed);
  t.put("experiment.workers", cfg.workers);
  return t;
}

inline void write_run_config(std::ostream& out, const RunConfig& cfg) {
  boost::property_tree::ini_parser::write_ini(out, run_config_to_tree(cfg));
}

}  // namespace bdris
