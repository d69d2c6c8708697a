#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "compactfold/lattice.hpp"
#include "compactfold/symmetry.hpp"

namespace compactfold {

struct PartialPath {
  std::vector<Site> sites;
  SymmetryBreaker::State state;
};

// All symmetry-admissible self-avoiding partial paths with seed_len sites,
// grown breadth first. Seeds come out in lexicographic order.
std::vector<PartialPath> seed_paths(const Lattice& lattice, const SymmetryBreaker& breaker,
                                    int seed_len);

using PathCallback = std::function<void(std::span<const Site>)>;

// Depth-first extension of one seed to every admissible Hamiltonian path, in
// lexicographic order. Returns the number of paths delivered. Stops early
// (returning false through `completed`) once *stop becomes true.
std::uint64_t extend_all(const Lattice& lattice, const SymmetryBreaker& breaker,
                         const PartialPath& seed, const PathCallback& visit,
                         const std::atomic<bool>* stop = nullptr, bool* completed = nullptr);

// Per-structure accumulator. Workers fill fresh() copies seed by seed, which
// are merged into the original in seed order.
class PathVisitor {
 public:
  virtual ~PathVisitor() = default;
  virtual std::string tag() const = 0;
  virtual std::unique_ptr<PathVisitor> fresh() const = 0;
  virtual void visit(std::span<const Site> path) = 0;
  virtual void merge(PathVisitor& other) = 0;
  virtual void save(std::ostream& out) const = 0;
  virtual void load(std::istream& in) = 0;
};

// Worker count: explicit value if positive, else COMPACTFOLD_THREADS, else the
// hardware concurrency.
int resolve_threads(int requested);

struct EnumerationOptions {
  int seed_len = 0;  // 0: shortest length giving at least 32 seeds per worker
  int threads = 0;
  BreakingMode mode = BreakingMode::kAuto;
  std::filesystem::path checkpoint;  // empty: no checkpointing
  double checkpoint_interval = 60.0;  // seconds
  bool resume = false;
  std::int64_t max_seeds = -1;  // stop after this many merged seeds (testing aid)
  const std::atomic<bool>* stop = nullptr;
};

struct EnumerationSummary {
  std::uint64_t count = 0;
  int seed_len = 0;
  int threads = 0;
  BreakingMode mode = BreakingMode::kAuto;
  std::size_t seeds_total = 0;
  std::size_t seeds_done = 0;
  double wall_seconds = 0.0;
  bool complete = false;
};

// Requires N = L. Visitors see every structure exactly once; their final state
// does not depend on thread count, seed length or interruption and resume.
EnumerationSummary enumerate_all(const Lattice& lattice, std::span<PathVisitor* const> visitors,
                                 const EnumerationOptions& options = {});

}  // namespace compactfold
