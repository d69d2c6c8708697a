#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "compactfold/lattice.hpp"

namespace compactfold {

using SitePermutation = std::vector<Site>;

// Point group of the box: every signed axis permutation that maps the box onto
// itself, kept as distinct site permutations. Identity is element 0.
class SymmetryGroup {
 public:
  explicit SymmetryGroup(const Lattice& lattice);

  int size() const { return static_cast<int>(ops_.size()); }
  const SitePermutation& operator[](int k) const { return ops_[k]; }
  std::span<const SitePermutation> operations() const { return ops_; }

  // Index of `perm` in the group, or -1.
  int find(const SitePermutation& perm) const;
  SitePermutation compose(int outer, int inner) const;

  std::vector<Site> apply(int k, std::span<const Site> path) const;
  // Lexicographically smallest image of `path` over the group.
  std::vector<Site> canonical(std::span<const Site> path) const;

 private:
  std::vector<SitePermutation> ops_;
};

enum class BreakingMode { kAuto, kRules, kCanonical };

BreakingMode parse_breaking_mode(std::string_view text);
std::string_view to_string(BreakingMode mode);

// Hand-derived rules cover Lx == Ly even with Lz != Lx (the 4x4x3 box among
// them). Everything else falls back to canonical pruning.
bool rules_supported(const Lattice& lattice);

struct StartPoint {
  Site site;
  bool diagonal_unbroken;  // start lies on the x = y reflection plane
  bool z_unbroken;         // start lies on the z mid-plane
};

// Orbit representatives x < Lx/2, y <= x, z < ceil(Lz/2), ordered by z, x, y.
// Throws DataError unless rules_supported().
std::vector<StartPoint> starting_points(const Lattice& lattice);

// Incremental symmetry filter for growing paths one site at a time. A path is
// emitted by the search iff every prefix passed step().
class SymmetryBreaker {
 public:
  struct State {
    std::uint64_t ops = 0;  // canonical mode: group elements still fixing the prefix
    bool diagonal = false;  // rules mode: diagonal reflection still unbroken
    bool z = false;         // rules mode: z reflection still unbroken
    bool operator==(const State&) const = default;
  };

  SymmetryBreaker(const Lattice& lattice, BreakingMode mode);

  BreakingMode mode() const { return mode_; }
  const SymmetryGroup& group() const { return group_; }

  struct Start {
    Site site;
    State state;
  };
  const std::vector<Start>& starts() const { return starts_; }

  // Whether the prefix ending at `from` may continue to `to`. Fills `out`.
  bool step(const State& in, Site from, Site to, State& out) const;

 private:
  const Lattice* lattice_;
  BreakingMode mode_;
  SymmetryGroup group_;
  std::vector<Start> starts_;
};

}  // namespace compactfold
