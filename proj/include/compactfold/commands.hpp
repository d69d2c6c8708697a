#pragma once

#include <atomic>
#include <iosfwd>

#include "compactfold/config.hpp"
#include "compactfold/observables.hpp"

namespace compactfold {

struct CommandContext {
  std::ostream& out;
  std::ostream& err;
  const std::atomic<bool>* stop = nullptr;
};

// Each returns a process exit code. Output files land in config.out_dir and
// are written atomically.

// qubo.txt in the coordinate text format.
int cmd_build_qubo(const ExperimentConfig& config, CommandContext& ctx);

// summary.csv, batch_s<sweeps>.csv, runs_s<sweeps>/run_<i>.json, and
// reference_lines.csv when anneal.dos is set. Timings go to anneal.log only.
int cmd_anneal(const ExperimentConfig& config, CommandContext& ctx);

// enumeration.txt, contacts.csv; dos.csv and lowest_k.csv when a sequence and
// matrix are configured; structures.hpth when enumerate.archive is on.
int cmd_enumerate(const ExperimentConfig& config, CommandContext& ctx);

// landscape.csv (rank,Q,dE) from a lowest_k.csv.
int cmd_landscape(const ExperimentConfig& config, CommandContext& ctx);

// lambda_sweep.csv: one row per (axis, delta).
int cmd_lambda_sweep(const ExperimentConfig& config, CommandContext& ctx);

// CSV helpers shared with the tests.
DensityOfStates read_dos_csv(std::istream& in);
std::vector<RankedPath> read_lowest_k_csv(std::istream& in);
std::string format_energy(double energy);  // fixed six decimals

}  // namespace compactfold
