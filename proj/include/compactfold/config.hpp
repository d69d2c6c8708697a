#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "compactfold/contact_matrix.hpp"
#include "compactfold/qubo.hpp"
#include "compactfold/sequence.hpp"

namespace compactfold {

// Everything a command needs. Loaded from an INI file whose keys are
// `section.key`; command-line flags are applied on top with the same keys.
struct ExperimentConfig {
  std::array<int, 3> dims = {4, 4, 3};

  std::filesystem::path sequences;  // FASTA
  std::string sequence = "1";       // 1-based index or record name
  std::filesystem::path matrix;
  std::optional<double> emin;       // overrides the record's emin attribute

  LagrangeParams lambda;

  int n_temps = 25;
  double ratio = 1.05;
  std::vector<std::int64_t> sweeps = {1000};
  std::int64_t runs = 10;
  std::uint64_t base_seed = 1;
  std::filesystem::path dos;  // optional input for reference lines

  int seed_len = 0;
  int lowest_k = 100;
  bool archive = false;
  std::string symmetry = "auto";
  double checkpoint_interval = 60.0;
  bool resume = false;
  std::int64_t max_seeds = -1;

  std::filesystem::path lowest_k_file;  // landscape input

  double lambda_step = 0.25;
  int lambda_steps = 2;

  std::filesystem::path out_dir = "out";
  int threads = 0;
};

// Every recognised key, for help text and validation.
const std::vector<std::string>& config_keys();

// Applies one setting. Relative paths are resolved against `base`. Throws
// UsageError for unknown keys or malformed values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base);

// Reads an INI file; relative paths inside it are relative to its directory.
ExperimentConfig load_config(const std::filesystem::path& path);

// Semantic checks shared by all commands (lambda >= 0, positive schedule...).
void validate(const ExperimentConfig& config);

Sequence load_sequence(const ExperimentConfig& config);
ContactMatrix load_matrix(const ExperimentConfig& config);

// Reference minimum: config emin, else the record's `emin` attribute.
std::optional<double> reference_energy(const ExperimentConfig& config, const Sequence& seq);

}  // namespace compactfold
