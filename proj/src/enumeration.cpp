#include "compactfold/enumeration.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <new>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "compactfold/error.hpp"
#include "compactfold/io.hpp"

namespace compactfold {

namespace {

std::uint64_t bit(Site s) { return std::uint64_t{1} << s; }

std::uint64_t path_mask(std::span<const Site> sites) {
  std::uint64_t m = 0;
  for (Site s : sites) m |= bit(s);
  return m;
}

class Search {
 public:
  Search(const Lattice& lattice, const SymmetryBreaker& breaker, const PathCallback& visit,
         const std::atomic<bool>* stop)
      : lattice_(lattice), breaker_(breaker), visit_(visit), stop_(stop), n_(lattice.site_count()) {
    all_ = n_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_) - 1;
    for (int s = 0; s < n_; ++s)
      if (lattice.parity(static_cast<Site>(s)) == 0) even_ |= bit(static_cast<Site>(s));
  }

  bool run(const PartialPath& seed) {
    if (seed.sites.empty()) throw DataError("cannot extend an empty seed");
    std::copy(seed.sites.begin(), seed.sites.end(), path_.begin());
    visited_ = path_mask(seed.sites);
    dfs(static_cast<int>(seed.sites.size()), seed.state);
    return !aborted_;
  }

  std::uint64_t count() const { return count_; }

 private:
  void dfs(int depth, const SymmetryBreaker::State& state) {
    if (depth == n_) {
      ++count_;
      visit_(std::span<const Site>(path_.data(), n_));
      return;
    }
    if (stop_ && (++nodes_ & 0xfff) == 0 && stop_->load(std::memory_order_relaxed)) aborted_ = true;
    if (aborted_) return;

    const Site head = path_[depth - 1];
    for (Site next : lattice_.neighbors(head)) {
      const std::uint64_t b = bit(next);
      if (visited_ & b) continue;
      SymmetryBreaker::State after;
      if (!breaker_.step(state, head, next, after)) continue;
      const std::uint64_t visited = visited_ | b;
      if (depth + 1 < n_ && !viable(head, next, visited)) continue;
      path_[depth] = next;
      visited_ = visited;
      dfs(depth + 1, after);
      visited_ &= ~b;
      if (aborted_) return;
    }
  }

  // Cheap necessary conditions for completing the path from `next`.
  bool viable(Site head, Site next, std::uint64_t visited) const {
    // A free neighbour of the old head with no free neighbours left can never
    // be reached: it is not adjacent to `next` (the lattice is bipartite).
    std::uint64_t around = lattice_.neighbor_mask(head) & ~visited;
    while (around) {
      const Site w = static_cast<Site>(std::countr_zero(around));
      around &= around - 1;
      if ((lattice_.neighbor_mask(w) & ~visited) == 0) return false;
    }
    // The remaining sites alternate in parity, starting opposite to `next`.
    const std::uint64_t free = all_ & ~visited;
    const int same_mask_count =
        std::popcount(free & (lattice_.parity(next) == 0 ? even_ : ~even_));
    const int other = std::popcount(free) - same_mask_count;
    const int excess = other - same_mask_count;
    return excess == 0 || excess == 1;
  }

  const Lattice& lattice_;
  const SymmetryBreaker& breaker_;
  const PathCallback& visit_;
  const std::atomic<bool>* stop_;
  int n_;
  std::uint64_t all_ = 0;
  std::uint64_t even_ = 0;
  std::array<Site, kMaxSites> path_{};
  std::uint64_t visited_ = 0;
  std::uint64_t count_ = 0;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
};

std::vector<PartialPath> initial_level(const SymmetryBreaker& breaker) {
  std::vector<PartialPath> level;
  for (const auto& start : breaker.starts()) level.push_back({{start.site}, start.state});
  return level;
}

std::vector<PartialPath> next_level(const Lattice& lattice, const SymmetryBreaker& breaker,
                                    const std::vector<PartialPath>& level) {
  std::vector<PartialPath> out;
  for (const auto& p : level) {
    const std::uint64_t visited = path_mask(p.sites);
    const Site head = p.sites.back();
    for (Site next : lattice.neighbors(head)) {
      if (visited & bit(next)) continue;
      SymmetryBreaker::State after;
      if (!breaker.step(p.state, head, next, after)) continue;
      PartialPath q{p.sites, after};
      q.sites.push_back(next);
      out.push_back(std::move(q));
    }
  }
  return out;
}

// Grows levels until the target seed count or the full length is reached.
std::vector<PartialPath> seeds_for_workers(const Lattice& lattice, const SymmetryBreaker& breaker,
                                           std::size_t target, int& seed_len) {
  auto level = initial_level(breaker);
  seed_len = 1;
  while (level.size() < target && seed_len < lattice.site_count()) {
    level = next_level(lattice, breaker, level);
    ++seed_len;
  }
  return level;
}

struct CheckpointHeader {
  std::array<int, 3> dims{};
  std::string mode;
  int seed_len = 0;
  std::size_t seeds_total = 0;
  std::size_t seeds_merged = 0;
  std::uint64_t count = 0;
};

constexpr const char* kCheckpointMagic = "compactfold-checkpoint";

void expect(std::istream& in, const char* word) {
  std::string got;
  if (!(in >> got) || got != word)
    throw DataError(fmt::format("checkpoint: expected '{}', found '{}'", word, got));
}

CheckpointHeader read_checkpoint_header(std::istream& in) {
  CheckpointHeader h;
  expect(in, kCheckpointMagic);
  int version = 0;
  in >> version;
  if (version != 1) throw DataError(fmt::format("checkpoint: unsupported version {}", version));
  expect(in, "dims");
  in >> h.dims[0] >> h.dims[1] >> h.dims[2];
  expect(in, "mode");
  in >> h.mode;
  expect(in, "seed_len");
  in >> h.seed_len;
  expect(in, "seeds_total");
  in >> h.seeds_total;
  expect(in, "seeds_merged");
  in >> h.seeds_merged;
  expect(in, "count");
  in >> h.count;
  if (!in) throw DataError("checkpoint: malformed header");
  return h;
}

void write_checkpoint(const std::filesystem::path& path, const CheckpointHeader& h,
                      std::span<PathVisitor* const> visitors) {
  write_atomically(path, [&](std::ostream& out) {
    fmt::print(out, "{} 1\n", kCheckpointMagic);
    fmt::print(out, "dims {} {} {}\nmode {}\nseed_len {}\n", h.dims[0], h.dims[1], h.dims[2], h.mode,
               h.seed_len);
    fmt::print(out, "seeds_total {}\nseeds_merged {}\ncount {}\n", h.seeds_total, h.seeds_merged,
               h.count);
    for (const PathVisitor* v : visitors) {
      fmt::print(out, "visitor {}\n", v->tag());
      v->save(out);
    }
  });
}

}  // namespace

std::vector<PartialPath> seed_paths(const Lattice& lattice, const SymmetryBreaker& breaker,
                                    int seed_len) {
  if (seed_len < 1 || seed_len > lattice.site_count()) {
    throw DataError(
        fmt::format("seed length {} outside 1..{}", seed_len, lattice.site_count()));
  }
  auto level = initial_level(breaker);
  for (int len = 1; len < seed_len; ++len) level = next_level(lattice, breaker, level);
  return level;
}

std::uint64_t extend_all(const Lattice& lattice, const SymmetryBreaker& breaker,
                         const PartialPath& seed, const PathCallback& visit,
                         const std::atomic<bool>* stop, bool* completed) {
  Search search(lattice, breaker, visit, stop);
  const bool done = search.run(seed);
  if (completed) *completed = done;
  return search.count();
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("COMPACTFOLD_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096)
      throw UsageError(fmt::format("COMPACTFOLD_THREADS must be a positive integer, got '{}'", env));
    return static_cast<int>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

EnumerationSummary enumerate_all(const Lattice& lattice, std::span<PathVisitor* const> visitors,
                                 const EnumerationOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const SymmetryBreaker breaker(lattice, options.mode);

  EnumerationSummary summary;
  summary.threads = resolve_threads(options.threads);
  summary.mode = breaker.mode();

  CheckpointHeader resumed;
  bool have_checkpoint = false;
  std::ifstream ckpt_in;
  if (options.resume && !options.checkpoint.empty() && std::filesystem::exists(options.checkpoint)) {
    ckpt_in.open(options.checkpoint);
    resumed = read_checkpoint_header(ckpt_in);
    if (resumed.dims != lattice.dims())
      throw DataError(fmt::format("checkpoint is for a {}x{}x{} box", resumed.dims[0],
                                  resumed.dims[1], resumed.dims[2]));
    if (resumed.mode != to_string(breaker.mode()))
      throw DataError(fmt::format("checkpoint used symmetry mode {}", resumed.mode));
    if (options.seed_len != 0 && options.seed_len != resumed.seed_len)
      throw DataError(fmt::format("checkpoint used seed length {}", resumed.seed_len));
    have_checkpoint = true;
  }

  std::vector<PartialPath> seeds;
  if (have_checkpoint) {
    summary.seed_len = resumed.seed_len;
    seeds = seed_paths(lattice, breaker, resumed.seed_len);
    if (seeds.size() != resumed.seeds_total)
      throw DataError("checkpoint seed count does not match this lattice");
    for (PathVisitor* v : visitors) {
      expect(ckpt_in, "visitor");
      std::string tag;
      ckpt_in >> tag;
      if (tag != v->tag()) throw DataError(fmt::format("checkpoint holds visitor '{}', expected '{}'", tag, v->tag()));
      v->load(ckpt_in);
    }
  } else if (options.seed_len > 0) {
    summary.seed_len = options.seed_len;
    seeds = seed_paths(lattice, breaker, options.seed_len);
  } else {
    seeds = seeds_for_workers(lattice, breaker, 32 * static_cast<std::size_t>(summary.threads),
                              summary.seed_len);
  }
  summary.seeds_total = seeds.size();

  std::size_t limit = seeds.size();
  if (options.max_seeds >= 0) limit = std::min(limit, static_cast<std::size_t>(options.max_seeds));

  CheckpointHeader header;
  header.dims = lattice.dims();
  header.mode = std::string(to_string(breaker.mode()));
  header.seed_len = summary.seed_len;
  header.seeds_total = seeds.size();
  header.seeds_merged = have_checkpoint ? resumed.seeds_merged : 0;
  header.count = have_checkpoint ? resumed.count : 0;

  struct Partial {
    std::uint64_t count = 0;
    std::vector<std::unique_ptr<PathVisitor>> parts;
  };

  std::mutex mutex;
  std::map<std::size_t, Partial> ready;
  std::atomic<std::size_t> next{header.seeds_merged};
  std::atomic<bool> failed{false};
  std::string failure;
  auto last_checkpoint = std::chrono::steady_clock::now();

  auto merge_ready = [&] {
    for (auto it = ready.find(header.seeds_merged); it != ready.end();
         it = ready.find(header.seeds_merged)) {
      for (std::size_t v = 0; v < visitors.size(); ++v) visitors[v]->merge(*it->second.parts[v]);
      header.count += it->second.count;
      ++header.seeds_merged;
      ready.erase(it);
    }
    if (!options.checkpoint.empty()) {
      const auto now = std::chrono::steady_clock::now();
      if (std::chrono::duration<double>(now - last_checkpoint).count() >= options.checkpoint_interval) {
        write_checkpoint(options.checkpoint, header, visitors);
        last_checkpoint = now;
      }
    }
  };

  auto worker = [&] {
    try {
      for (;;) {
        if (failed.load() || (options.stop && options.stop->load())) return;
        const std::size_t i = next.fetch_add(1);
        if (i >= limit) return;
        Partial partial;
        for (PathVisitor* v : visitors) partial.parts.push_back(v->fresh());
        const PathCallback visit = [&](std::span<const Site> path) {
          for (auto& part : partial.parts) part->visit(path);
        };
        bool completed = false;
        partial.count = extend_all(lattice, breaker, seeds[i], visit, options.stop, &completed);
        if (!completed) return;
        std::lock_guard lock(mutex);
        ready.emplace(i, std::move(partial));
        merge_ready();
      }
    } catch (const std::bad_alloc&) {
      std::lock_guard lock(mutex);
      failure = "out of memory";
      failed = true;
    } catch (const std::exception& e) {
      std::lock_guard lock(mutex);
      failure = e.what();
      failed = true;
    }
  };

  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < summary.threads; ++t) pool.emplace_back(worker);
  }

  summary.count = header.count;
  summary.seeds_done = header.seeds_merged;
  summary.complete = header.seeds_merged == seeds.size();
  if (!options.checkpoint.empty()) write_checkpoint(options.checkpoint, header, visitors);
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (failed) {
    throw Error(fmt::format("enumeration stopped after {} of {} seeds: {}{}", summary.seeds_done,
                            summary.seeds_total, failure,
                            options.checkpoint.empty()
                                ? ""
                                : fmt::format(" (checkpoint written to {})", options.checkpoint.string())));
  }
  return summary;
}

}  // namespace compactfold
