#include "compactfold/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "compactfold/error.hpp"
#include "compactfold/io.hpp"
#include "compactfold/lattice.hpp"

namespace compactfold {

namespace fs = std::filesystem;

namespace {

std::string trimmed(const std::string& s) { return boost::algorithm::trim_copy(s); }

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, value, boost::algorithm::is_any_of(",x "),
                          boost::algorithm::token_compress_on);
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string s = trimmed(text);
  T v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty())
    throw UsageError(fmt::format("{}: cannot parse '{}' as a number", key, text));
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw UsageError(fmt::format("{}: value must be finite", key));
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = boost::algorithm::to_lower_copy(trimmed(text));
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw UsageError(fmt::format("{}: expected a boolean, got '{}'", key, text));
}

fs::path resolve(const fs::path& base, const std::string& text) {
  fs::path p(trimmed(text));
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&,
                                  const fs::path&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"lattice.dims",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         const auto parts = split_list(v);
         if (parts.size() != 3) throw UsageError(fmt::format("{}: expected three dimensions, got '{}'", k, v));
         for (int a = 0; a < 3; ++a) c.dims[a] = parse_number<int>(k, parts[a]);
       }},
      {"data.sequences",
       [](ExperimentConfig& c, const std::string&, const std::string& v, const fs::path& b) {
         c.sequences = resolve(b, v);
       }},
      {"data.sequence",
       [](ExperimentConfig& c, const std::string&, const std::string& v, const fs::path&) {
         c.sequence = trimmed(v);
       }},
      {"data.matrix",
       [](ExperimentConfig& c, const std::string&, const std::string& v, const fs::path& b) {
         c.matrix = resolve(b, v);
       }},
      {"data.emin",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.emin = parse_number<double>(k, v);
       }},
      {"qubo.lambda",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         const auto parts = split_list(v);
         if (parts.size() != 3) throw UsageError(fmt::format("{}: expected three values, got '{}'", k, v));
         c.lambda = {parse_number<double>(k, parts[0]), parse_number<double>(k, parts[1]),
                     parse_number<double>(k, parts[2])};
       }},
      {"anneal.n_temps",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.n_temps = parse_number<int>(k, v);
       }},
      {"anneal.ratio",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.ratio = parse_number<double>(k, v);
       }},
      {"anneal.sweeps",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.sweeps.clear();
         for (const auto& p : split_list(v)) c.sweeps.push_back(parse_number<std::int64_t>(k, p));
       }},
      {"anneal.runs",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.runs = parse_number<std::int64_t>(k, v);
       }},
      {"anneal.seed",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.base_seed = parse_number<std::uint64_t>(k, v);
       }},
      {"anneal.dos",
       [](ExperimentConfig& c, const std::string&, const std::string& v, const fs::path& b) {
         c.dos = resolve(b, v);
       }},
      {"enumerate.seed_len",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.seed_len = parse_number<int>(k, v);
       }},
      {"enumerate.lowest_k",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.lowest_k = parse_number<int>(k, v);
       }},
      {"enumerate.archive",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.archive = parse_bool(k, v);
       }},
      {"enumerate.symmetry",
       [](ExperimentConfig& c, const std::string&, const std::string& v, const fs::path&) {
         c.symmetry = trimmed(v);
       }},
      {"enumerate.checkpoint_interval",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.checkpoint_interval = parse_number<double>(k, v);
       }},
      {"enumerate.resume",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.resume = parse_bool(k, v);
       }},
      {"enumerate.max_seeds",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.max_seeds = parse_number<std::int64_t>(k, v);
       }},
      {"landscape.lowest_k",
       [](ExperimentConfig& c, const std::string&, const std::string& v, const fs::path& b) {
         c.lowest_k_file = resolve(b, v);
       }},
      {"lambda_sweep.step",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.lambda_step = parse_number<double>(k, v);
       }},
      {"lambda_sweep.steps",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.lambda_steps = parse_number<int>(k, v);
       }},
      {"output.dir",
       [](ExperimentConfig& c, const std::string&, const std::string& v, const fs::path& b) {
         c.out_dir = resolve(b, v);
       }},
      {"run.threads",
       [](ExperimentConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.threads = parse_number<int>(k, v);
       }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return keys;
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   const fs::path& base) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw UsageError(fmt::format("unknown configuration key '{}'", key));
  it->second(config, key, value, base);
}

ExperimentConfig load_config(const fs::path& path) {
  auto in = open_input(path);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError(fmt::format("{}: line {}: {}", path.string(), e.line(), e.message()));
  }
  ExperimentConfig config;
  const fs::path base = path.parent_path();
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw UsageError(fmt::format("{}: key '{}' must live in a section", path.string(), section));
    }
    for (const auto& [key, node] : body) {
      apply_setting(config, section + "." + key, node.get_value<std::string>(), base);
    }
  }
  return config;
}

void validate(const ExperimentConfig& c) {
  try {
    Lattice(c.dims[0], c.dims[1], c.dims[2]);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  try {
    validate(c.lambda);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (c.n_temps < 1) throw UsageError("anneal.n_temps must be at least 1");
  if (!(c.ratio > 1.0)) throw UsageError("anneal.ratio must exceed 1");
  if (c.sweeps.empty()) throw UsageError("anneal.sweeps must list at least one value");
  for (auto s : c.sweeps)
    if (s < 1) throw UsageError(fmt::format("anneal.sweeps values must be positive, got {}", s));
  if (c.runs < 1) throw UsageError(fmt::format("anneal.runs must be positive, got {}", c.runs));
  if (c.lowest_k < 1) throw UsageError("enumerate.lowest_k must be at least 1");
  if (c.seed_len < 0) throw UsageError("enumerate.seed_len cannot be negative");
  if (!(c.checkpoint_interval > 0)) throw UsageError("enumerate.checkpoint_interval must be positive");
  if (!(c.lambda_step > 0)) throw UsageError("lambda_sweep.step must be positive");
  if (c.lambda_steps < 0) throw UsageError("lambda_sweep.steps cannot be negative");
  if (c.threads < 0) throw UsageError("run.threads cannot be negative");
  if (c.symmetry != "auto" && c.symmetry != "rules" && c.symmetry != "canonical")
    throw UsageError(fmt::format("enumerate.symmetry must be auto, rules or canonical, got '{}'", c.symmetry));
}

Sequence load_sequence(const ExperimentConfig& config) {
  if (config.sequences.empty()) throw UsageError("no sequence file given (data.sequences / --sequences)");
  auto in = open_input(config.sequences);
  const auto records = read_sequences(in);
  if (records.empty()) throw DataError(fmt::format("{} holds no sequences", config.sequences.string()));
  for (const auto& r : records)
    if (r.name() == config.sequence) return r;
  int index = 0;
  try {
    index = parse_number<int>("data.sequence", config.sequence);
  } catch (const UsageError&) {
    throw UsageError(fmt::format("no sequence named '{}' in {}", config.sequence, config.sequences.string()));
  }
  if (index < 1 || index > static_cast<int>(records.size())) {
    throw UsageError(fmt::format("sequence index {} out of range 1..{} in {}", index, records.size(),
                                 config.sequences.string()));
  }
  return records[index - 1];
}

ContactMatrix load_matrix(const ExperimentConfig& config) {
  if (config.matrix.empty()) throw UsageError("no contact matrix given (data.matrix / --matrix)");
  auto in = open_input(config.matrix);
  try {
    return load_contact_matrix(in);
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", config.matrix.string(), e.what()));
  }
}

std::optional<double> reference_energy(const ExperimentConfig& config, const Sequence& seq) {
  if (config.emin) return config.emin;
  if (auto attr = seq.attribute("emin")) return parse_number<double>("emin attribute", *attr);
  return std::nullopt;
}

}  // namespace compactfold
