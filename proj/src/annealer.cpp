#include "compactfold/annealer.hpp"

#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "compactfold/error.hpp"

namespace compactfold {

Schedule make_schedule(int n_temps, double ratio, std::int64_t sweeps) {
  if (n_temps < 1) throw DataError(fmt::format("need at least one temperature, got {}", n_temps));
  if (!(ratio > 1.0)) throw DataError(fmt::format("temperature ratio must exceed 1, got {}", ratio));
  if (sweeps < 1) throw DataError(fmt::format("sweeps per temperature must be positive, got {}", sweeps));
  Schedule s;
  s.sweeps_per_temp = sweeps;
  for (int k = 1; k <= n_temps; ++k) s.betas.push_back(std::pow(ratio, k));
  return s;
}

void validate(const Schedule& schedule) {
  if (schedule.sweeps_per_temp < 0) throw DataError("sweeps per temperature cannot be negative");
  for (std::size_t k = 0; k < schedule.betas.size(); ++k) {
    if (!(schedule.betas[k] >= 0) || !std::isfinite(schedule.betas[k]))
      throw DataError(fmt::format("beta[{}] = {} is not a finite non-negative value", k, schedule.betas[k]));
    if (k > 0 && !(schedule.betas[k] > schedule.betas[k - 1]))
      throw DataError("inverse temperatures must be strictly increasing");
  }
}

namespace {

std::vector<std::uint8_t> draw_state(Rng& rng, std::size_t n_bits) {
  std::vector<std::uint8_t> bits(n_bits);
  for (std::size_t k = 0; k < n_bits; k += 64) {
    const std::uint64_t word = rng();
    for (std::size_t b = 0; b < 64 && k + b < n_bits; ++b) bits[k + b] = (word >> b) & 1U;
  }
  return bits;
}

}  // namespace

std::vector<std::uint8_t> random_state(std::size_t n_bits, std::uint64_t seed) {
  Rng rng(seed);
  return draw_state(rng, n_bits);
}

MetropolisKernel::MetropolisKernel(const QuboModel& model)
    : n_bits_(model.n_bits), constant_(model.constant), linear_(model.linear) {
  std::vector<std::uint32_t> degree(n_bits_ + 1, 0);
  for (const auto& q : model.quadratic) {
    ++degree[q.i];
    ++degree[q.j];
  }
  row_start_.assign(n_bits_ + 1, 0);
  for (std::size_t k = 0; k < n_bits_; ++k) row_start_[k + 1] = row_start_[k] + degree[k];
  row_bits_.resize(row_start_.back());
  row_coeffs_.resize(row_start_.back());
  std::vector<std::uint32_t> fill(row_start_.begin(), row_start_.end() - 1);
  for (const auto& q : model.quadratic) {
    row_bits_[fill[q.i]] = q.j;
    row_coeffs_[fill[q.i]++] = q.coeff;
    row_bits_[fill[q.j]] = q.i;
    row_coeffs_[fill[q.j]++] = q.coeff;
  }
  words_.assign((n_bits_ + 63) / 64, 0);
  field_.assign(n_bits_, 0.0);
  accept_.assign(n_bits_, 0.0);
  stale_.assign(n_bits_, 1);
  resync();
}

void MetropolisKernel::load(std::span<const std::uint8_t> bits) {
  if (bits.size() != n_bits_)
    throw DataError(fmt::format("state has {} bits, model has {}", bits.size(), n_bits_));
  std::fill(words_.begin(), words_.end(), 0);
  for (std::size_t k = 0; k < n_bits_; ++k)
    if (bits[k]) words_[k >> 6] |= std::uint64_t{1} << (k & 63);
  resync();
}

std::vector<std::uint8_t> MetropolisKernel::state() const {
  std::vector<std::uint8_t> out(n_bits_);
  for (std::size_t k = 0; k < n_bits_; ++k) out[k] = bit(k) ? 1 : 0;
  return out;
}

double MetropolisKernel::resync() {
  double e = constant_;
  for (std::size_t k = 0; k < n_bits_; ++k) {
    double f = linear_[k];
    for (std::uint32_t r = row_start_[k]; r < row_start_[k + 1]; ++r)
      if (bit(row_bits_[r])) f += row_coeffs_[r];
    field_[k] = f;
  }
  std::fill(stale_.begin(), stale_.end(), 1);
  // Each active pair appears in the fields of both endpoints.
  for (std::size_t k = 0; k < n_bits_; ++k)
    if (bit(k)) e += 0.5 * (linear_[k] + field_[k]);
  energy_ = e;
  return e;
}

void MetropolisKernel::flip(std::size_t k) {
  const double sign = bit(k) ? -1.0 : 1.0;
  energy_ += flip_delta(k);
  words_[k >> 6] ^= std::uint64_t{1} << (k & 63);
  stale_[k] = 1;
  for (std::uint32_t r = row_start_[k]; r < row_start_[k + 1]; ++r) {
    const std::uint32_t j = row_bits_[r];
    field_[j] += sign * row_coeffs_[r];
    stale_[j] = 1;
  }
}

SweepStats MetropolisKernel::sweep(double beta, Rng& rng) {
  if (beta != beta_) {
    beta_ = beta;
    std::fill(stale_.begin(), stale_.end(), 1);
  }
  SweepStats stats;
  stats.attempted = n_bits_;
  for (std::size_t t = 0; t < n_bits_; ++t) {
    const std::size_t k = uniform_index(rng, n_bits_);
    const double delta = flip_delta(k);
    if (delta > 0.0) {
      if (stale_[k]) {
        accept_[k] = std::exp(-beta * delta);
        stale_[k] = 0;
      }
      if (!(uniform_unit(rng) < accept_[k])) continue;
    }
    flip(k);
    ++stats.accepted;
  }
  return stats;
}

RunResult anneal(const QuboModel& model, const Schedule& schedule, std::uint64_t seed,
                 const AnnealOptions& options) {
  validate(schedule);
  const auto started = std::chrono::steady_clock::now();
  RunResult result;
  result.seed = seed;

  Rng rng(seed);
  MetropolisKernel kernel(model);
  if (options.initial_state) {
    kernel.load(*options.initial_state);
  } else {
    kernel.load(draw_state(rng, model.n_bits));
  }
  result.best_energy = kernel.energy();
  result.best_bits = kernel.state();

  for (double beta : schedule.betas) {
    kernel.resync();
    std::uint64_t attempted = 0;
    std::uint64_t accepted = 0;
    for (std::int64_t s = 0; s < schedule.sweeps_per_temp; ++s) {
      if (options.stop && options.stop->load(std::memory_order_relaxed)) {
        result.interrupted = true;
        break;
      }
      const SweepStats stats = kernel.sweep(beta, rng);
      attempted += stats.attempted;
      accepted += stats.accepted;
      ++result.sweeps_done;
      if (options.verify_every_sweep) {
        const double cached = kernel.energy();
        const double exact = model.energy(kernel.state());
        if (std::abs(cached - exact) > 1e-9) {
          throw std::logic_error(fmt::format("incremental energy {} drifted from {} at sweep {}",
                                             cached, exact, result.sweeps_done));
        }
      }
      if (kernel.energy() < result.best_energy) {
        result.best_energy = kernel.energy();
        result.best_bits = kernel.state();
      }
    }
    TemperatureRecord rec;
    rec.beta = beta;
    rec.energy = kernel.resync();
    rec.terms = model.term_energies(kernel.state());
    rec.acceptance_rate = attempted ? static_cast<double>(accepted) / static_cast<double>(attempted) : 0.0;
    result.trace.push_back(rec);
    if (result.interrupted) break;
  }

  result.final_bits = kernel.state();
  result.final_energy = model.energy(result.final_bits);
  result.final_terms = model.term_energies(result.final_bits);
  if (result.final_energy < result.best_energy) {
    result.best_energy = result.final_energy;
    result.best_bits = result.final_bits;
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

bool is_success(const RunResult& run, std::optional<double> reference) {
  if (!reference || !run.final_terms) return false;
  return run.final_terms->penalties_zero() &&
         std::abs(run.final_terms->contact - *reference) <= kSuccessTolerance;
}

BatchStats summarize(std::span<const RunResult> runs, std::optional<double> reference) {
  BatchStats stats;
  stats.reference = reference;
  stats.runs = runs.size();
  double sum = 0.0;
  for (const auto& r : runs) {
    sum += r.final_energy;
    if (is_success(r, reference)) ++stats.successes;
  }
  if (!runs.empty()) {
    stats.mean_final_energy = sum / static_cast<double>(runs.size());
    stats.success_rate = static_cast<double>(stats.successes) / static_cast<double>(runs.size());
  }
  return stats;
}

BatchResult run_batch(const QuboModel& model, const Schedule& schedule, std::size_t n_runs,
                      std::uint64_t base_seed, std::optional<double> reference,
                      const BatchOptions& options) {
  if (n_runs < 1) throw DataError("a batch needs at least one run");
  validate(schedule);
  std::vector<std::optional<RunResult>> slots(n_runs);
  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;

  auto worker = [&] {
    AnnealOptions run_options;
    run_options.stop = options.stop;
    for (;;) {
      if (options.stop && options.stop->load()) return;
      const std::size_t index = next.fetch_add(1);
      if (index >= n_runs) return;
      RunResult run = anneal(model, schedule, base_seed + index, run_options);
      if (run.interrupted) return;
      std::lock_guard lock(report_mutex);
      if (options.on_run) options.on_run(index, run);
      slots[index] = std::move(run);
    }
  };

  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(n_runs)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  BatchResult result;
  for (auto& slot : slots) {
    if (slot) {
      result.runs.push_back(std::move(*slot));
    } else {
      result.interrupted = true;
    }
  }
  result.stats = summarize(result.runs, reference);
  return result;
}

}  // namespace compactfold
