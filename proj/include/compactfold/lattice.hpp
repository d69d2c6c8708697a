#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace compactfold {

using Site = std::uint8_t;

// Site masks are 64-bit words, so a lattice holds at most 64 sites.
inline constexpr int kMaxSites = 64;

struct Coord {
  int x = 0;
  int y = 0;
  int z = 0;
  bool operator==(const Coord&) const = default;
};

// Box of Lx*Ly*Lz unit-spaced sites with nearest-neighbour adjacency.
// Sites are numbered n = x + Lx*y + Lx*Ly*z.
class Lattice {
 public:
  Lattice(int lx, int ly, int lz);

  std::array<int, 3> dims() const { return dims_; }
  int lx() const { return dims_[0]; }
  int ly() const { return dims_[1]; }
  int lz() const { return dims_[2]; }
  int site_count() const { return site_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  bool contains(Coord c) const;
  Site site(Coord c) const;
  Coord coord(Site s) const { return coords_[s]; }

  // Neighbours of a site in ascending index order.
  std::span<const Site> neighbors(Site s) const {
    return {neighbors_.data() + offsets_[s], neighbors_.data() + offsets_[s + 1]};
  }
  std::uint64_t neighbor_mask(Site s) const { return masks_[s]; }
  bool adjacent(Site a, Site b) const { return (masks_[a] >> b) & 1U; }

  // Unordered nearest-neighbour pairs (a < b), ascending.
  std::span<const std::pair<Site, Site>> edges() const { return edges_; }

  // 0 for even x+y+z, 1 for odd.
  int parity(Site s) const {
    const Coord c = coords_[s];
    return (c.x + c.y + c.z) & 1;
  }

  bool operator==(const Lattice& other) const { return dims_ == other.dims_; }

 private:
  std::array<int, 3> dims_;
  int site_count_;
  std::vector<Coord> coords_;
  std::vector<int> offsets_;
  std::vector<Site> neighbors_;
  std::vector<std::uint64_t> masks_;
  std::vector<std::pair<Site, Site>> edges_;
};

Lattice build_lattice(int lx, int ly, int lz);

}  // namespace compactfold
