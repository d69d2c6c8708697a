#include "compactfold/lattice.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "compactfold/error.hpp"

namespace compactfold {

Lattice::Lattice(int lx, int ly, int lz) : dims_{lx, ly, lz} {
  if (lx < 1 || ly < 1 || lz < 1) {
    throw DataError(fmt::format("lattice dimensions must be positive, got {}x{}x{}", lx, ly, lz));
  }
  const long total = static_cast<long>(lx) * ly * lz;
  if (total > kMaxSites) {
    throw DataError(fmt::format("lattice {}x{}x{} has {} sites; at most {} are supported", lx, ly,
                                lz, total, kMaxSites));
  }
  site_count_ = static_cast<int>(total);

  coords_.resize(site_count_);
  for (int z = 0; z < lz; ++z)
    for (int y = 0; y < ly; ++y)
      for (int x = 0; x < lx; ++x) coords_[site({x, y, z})] = {x, y, z};

  offsets_.assign(site_count_ + 1, 0);
  masks_.assign(site_count_, 0);
  static constexpr std::array<Coord, 6> kSteps{
      {{0, 0, -1}, {0, -1, 0}, {-1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  // kSteps is ordered so that neighbour indices come out ascending.
  for (int s = 0; s < site_count_; ++s) {
    const Coord c = coords_[s];
    for (const Coord& d : kSteps) {
      const Coord n{c.x + d.x, c.y + d.y, c.z + d.z};
      if (!contains(n)) continue;
      const Site t = site(n);
      neighbors_.push_back(t);
      masks_[s] |= std::uint64_t{1} << t;
      if (s < t) edges_.emplace_back(static_cast<Site>(s), t);
    }
    offsets_[s + 1] = static_cast<int>(neighbors_.size());
  }
  std::sort(edges_.begin(), edges_.end());
}

bool Lattice::contains(Coord c) const {
  return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < dims_[0] && c.y < dims_[1] && c.z < dims_[2];
}

Site Lattice::site(Coord c) const {
  return static_cast<Site>(c.x + dims_[0] * (c.y + dims_[1] * c.z));
}

Lattice build_lattice(int lx, int ly, int lz) { return Lattice(lx, ly, lz); }

}  // namespace compactfold
