#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "compactfold/qubo.hpp"
#include "compactfold/random.hpp"

namespace compactfold {

// All annealing randomness comes from this generator, seeded with the run seed.
using Rng = Xoshiro256;

// Uniform integer in [0, n) by 64x64 -> 128 multiply-shift.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}
// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Schedule {
  std::vector<double> betas;  // strictly increasing inverse temperatures
  std::int64_t sweeps_per_temp = 0;
};

// betas[k] = ratio^(k+1), k = 0..n_temps-1.
Schedule make_schedule(int n_temps, double ratio, std::int64_t sweeps);
void validate(const Schedule& schedule);

// Each bit 0/1 with probability 1/2, reproducible per seed.
std::vector<std::uint8_t> random_state(std::size_t n_bits, std::uint64_t seed);

struct SweepStats {
  std::uint64_t attempted = 0;
  std::uint64_t accepted = 0;
};

// Single-bit-flip Metropolis kernel over a QUBO. Keeps the bits packed in
// 64-bit words and caches each bit's local field and acceptance probability,
// so a rejected proposal costs O(1) and an accepted flip O(row degree).
class MetropolisKernel {
 public:
  explicit MetropolisKernel(const QuboModel& model);

  std::size_t n_bits() const { return n_bits_; }
  void load(std::span<const std::uint8_t> bits);
  std::vector<std::uint8_t> state() const;
  bool bit(std::size_t k) const { return (words_[k >> 6] >> (k & 63)) & 1U; }

  // Cached energy, updated incrementally by accepted flips.
  double energy() const { return energy_; }
  // Energy change if bit k were flipped.
  double flip_delta(std::size_t k) const { return bit(k) ? -field_[k] : field_[k]; }
  void flip(std::size_t k);

  // n_bits proposals at uniformly random positions (with replacement), each
  // accepted with probability min(1, exp(-beta * dE)).
  SweepStats sweep(double beta, Rng& rng);

  // Recomputes fields and energy from the bits; returns the energy.
  double resync();

 private:
  std::size_t n_bits_;
  double constant_;
  std::vector<double> linear_;
  std::vector<std::uint32_t> row_start_;
  std::vector<std::uint32_t> row_bits_;
  std::vector<double> row_coeffs_;
  std::vector<std::uint64_t> words_;
  std::vector<double> field_;
  // exp(-beta * flip_delta(k)) for beta_; recomputed when stale_[k] is set.
  std::vector<double> accept_;
  std::vector<std::uint8_t> stale_;
  double beta_ = -1.0;
  double energy_ = 0.0;
};

struct TemperatureRecord {
  double beta = 0.0;
  std::optional<TermEnergies> terms;  // state at the end of this temperature
  double energy = 0.0;
  double acceptance_rate = 0.0;
};

struct RunResult {
  std::uint64_t seed = 0;
  double final_energy = 0.0;
  std::vector<std::uint8_t> final_bits;
  std::optional<TermEnergies> final_terms;
  double best_energy = 0.0;
  std::vector<std::uint8_t> best_bits;
  std::vector<TemperatureRecord> trace;
  std::int64_t sweeps_done = 0;
  double wall_seconds = 0.0;
  bool interrupted = false;
};

struct AnnealOptions {
  // Start from this state instead of random_state(n_bits, seed).
  std::optional<std::vector<std::uint8_t>> initial_state;
  // Recompute the energy from scratch after every sweep and throw
  // std::logic_error if the cached value has drifted by more than 1e-9.
  bool verify_every_sweep = false;
  const std::atomic<bool>* stop = nullptr;
};

RunResult anneal(const QuboModel& model, const Schedule& schedule, std::uint64_t seed,
                 const AnnealOptions& options = {});

// A run succeeds when its final state has zero penalties and a contact energy
// within 1e-6 of the reference minimum.
inline constexpr double kSuccessTolerance = 1e-6;
bool is_success(const RunResult& run, std::optional<double> reference);

struct BatchOptions {
  int threads = 1;
  const std::atomic<bool>* stop = nullptr;
  // Called (serialised) as runs finish, in completion order.
  std::function<void(std::size_t index, const RunResult&)> on_run;
};

struct BatchStats {
  std::size_t runs = 0;  // completed runs
  std::size_t successes = 0;
  double mean_final_energy = 0.0;
  double success_rate = 0.0;
  std::optional<double> reference;
};

struct BatchResult {
  BatchStats stats;
  std::vector<RunResult> runs;  // index order; interrupted batches keep completed runs only
  bool interrupted = false;
};

// Runs n_runs independent anneals with seeds base_seed + index.
BatchResult run_batch(const QuboModel& model, const Schedule& schedule, std::size_t n_runs,
                      std::uint64_t base_seed, std::optional<double> reference,
                      const BatchOptions& options = {});

BatchStats summarize(std::span<const RunResult> runs, std::optional<double> reference);

}  // namespace compactfold
