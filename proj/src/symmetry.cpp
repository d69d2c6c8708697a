#include "compactfold/symmetry.hpp"

#include <algorithm>
#include <array>
#include <bit>

#include <fmt/format.h>

#include "compactfold/error.hpp"

namespace compactfold {

SymmetryGroup::SymmetryGroup(const Lattice& lattice) {
  const auto dims = lattice.dims();
  std::array<int, 3> axes = {0, 1, 2};
  do {
    if (dims[0] != dims[axes[0]] || dims[1] != dims[axes[1]] || dims[2] != dims[axes[2]]) continue;
    for (int signs = 0; signs < 8; ++signs) {
      SitePermutation perm(lattice.site_count());
      for (int s = 0; s < lattice.site_count(); ++s) {
        const Coord c = lattice.coord(static_cast<Site>(s));
        const std::array<int, 3> v = {c.x, c.y, c.z};
        std::array<int, 3> w;
        for (int a = 0; a < 3; ++a) {
          const int src = v[axes[a]];
          w[a] = (signs >> a) & 1 ? dims[a] - 1 - src : src;
        }
        perm[s] = lattice.site({w[0], w[1], w[2]});
      }
      if (find(perm) < 0) ops_.push_back(std::move(perm));
    }
  } while (std::next_permutation(axes.begin(), axes.end()));
}

int SymmetryGroup::find(const SitePermutation& perm) const {
  for (int k = 0; k < size(); ++k)
    if (ops_[k] == perm) return k;
  return -1;
}

SitePermutation SymmetryGroup::compose(int outer, int inner) const {
  SitePermutation out(ops_[inner].size());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = ops_[outer][ops_[inner][s]];
  return out;
}

std::vector<Site> SymmetryGroup::apply(int k, std::span<const Site> path) const {
  std::vector<Site> out(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) out[i] = ops_[k][path[i]];
  return out;
}

std::vector<Site> SymmetryGroup::canonical(std::span<const Site> path) const {
  std::vector<Site> best(path.begin(), path.end());
  for (int k = 1; k < size(); ++k) {
    auto image = apply(k, path);
    if (image < best) best = std::move(image);
  }
  return best;
}

BreakingMode parse_breaking_mode(std::string_view text) {
  if (text == "auto") return BreakingMode::kAuto;
  if (text == "rules") return BreakingMode::kRules;
  if (text == "canonical") return BreakingMode::kCanonical;
  throw UsageError(fmt::format("unknown symmetry mode '{}' (expected auto, rules or canonical)", text));
}

std::string_view to_string(BreakingMode mode) {
  switch (mode) {
    case BreakingMode::kAuto: return "auto";
    case BreakingMode::kRules: return "rules";
    case BreakingMode::kCanonical: return "canonical";
  }
  return "?";
}

bool rules_supported(const Lattice& lattice) {
  return lattice.lx() == lattice.ly() && lattice.lx() % 2 == 0 && lattice.lz() != lattice.lx();
}

std::vector<StartPoint> starting_points(const Lattice& lattice) {
  if (!rules_supported(lattice)) {
    throw DataError(fmt::format("no symmetry-breaking rules for a {}x{}x{} box", lattice.lx(),
                                lattice.ly(), lattice.lz()));
  }
  std::vector<StartPoint> out;
  const int lz = lattice.lz();
  for (int z = 0; z < (lz + 1) / 2; ++z) {
    for (int x = 0; x < lattice.lx() / 2; ++x) {
      for (int y = 0; y <= x; ++y) {
        const Site s = lattice.site({x, y, z});
        const Site diagonal_image = lattice.site({y, x, z});
        const Site z_image = lattice.site({x, y, lz - 1 - z});
        out.push_back({s, diagonal_image == s, z_image == s});
      }
    }
  }
  return out;
}

SymmetryBreaker::SymmetryBreaker(const Lattice& lattice, BreakingMode mode)
    : lattice_(&lattice), mode_(mode), group_(lattice) {
  if (mode_ == BreakingMode::kAuto)
    mode_ = rules_supported(lattice) ? BreakingMode::kRules : BreakingMode::kCanonical;

  if (mode_ == BreakingMode::kRules) {
    for (const auto& p : starting_points(lattice)) {
      State st;
      st.diagonal = p.diagonal_unbroken;
      st.z = p.z_unbroken;
      starts_.push_back({p.site, st});
    }
    return;
  }

  if (group_.size() > 64) throw DataError("symmetry group too large for canonical pruning");
  for (int s = 0; s < lattice.site_count(); ++s) {
    State st;
    bool minimal = true;
    for (int k = 1; k < group_.size(); ++k) {
      const Site image = group_[k][s];
      if (image < s) minimal = false;
      if (image == s) st.ops |= std::uint64_t{1} << k;
    }
    if (minimal) starts_.push_back({static_cast<Site>(s), st});
  }
}

bool SymmetryBreaker::step(const State& in, Site from, Site to, State& out) const {
  out = in;
  if (mode_ == BreakingMode::kRules) {
    const Coord a = lattice_->coord(from);
    const Coord b = lattice_->coord(to);
    if (b.z == a.z) {
      if (in.diagonal) {
        // Of each mirror pair {+x,+y}, {-x,-y} keep +x and -y.
        if (!(b.x == a.x + 1 || b.y == a.y - 1)) return false;
        out.diagonal = false;
      }
    } else if (in.z) {
      if (b.z != a.z - 1) return false;
      out.z = false;
    }
    return true;
  }

  std::uint64_t ops = in.ops;
  while (ops) {
    const int k = std::countr_zero(ops);
    ops &= ops - 1;
    const Site image = group_[k][to];
    if (image < to) return false;
    if (image > to) out.ops &= ~(std::uint64_t{1} << k);
  }
  return true;
}

}  // namespace compactfold
