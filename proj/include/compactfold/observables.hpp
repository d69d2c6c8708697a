#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "compactfold/conformation.hpp"
#include "compactfold/enumeration.hpp"

namespace compactfold {

// Energies are binned on an integer grid of this many steps per unit. MJ
// entries carry two decimals, so sums land exactly on grid points.
inline constexpr double kEnergyResolution = 1e6;

std::int64_t energy_key(double energy);
double key_energy(std::int64_t key);

class DensityOfStates {
 public:
  struct Bin {
    double energy;
    std::uint64_t count;
  };

  void add(double energy, std::uint64_t count = 1);
  void add_key(std::int64_t key, std::uint64_t count);
  void merge(const DensityOfStates& other);

  std::uint64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }
  std::vector<Bin> bins() const;  // ascending energy
  const std::map<std::int64_t, std::uint64_t>& keyed() const { return counts_; }

  bool operator==(const DensityOfStates&) const = default;

 private:
  std::map<std::int64_t, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// For each q > 1, the smallest energy whose cumulative count from below
// reaches total / q.
std::vector<double> quantiles(const DensityOfStates& dos, std::span<const double> qs);

struct RankedPath {
  double energy;
  std::vector<Site> path;
  auto operator<=>(const RankedPath&) const = default;
};

// The K lowest structures, ordered by energy, then by path.
class LowestK {
 public:
  explicit LowestK(int k);

  int k() const { return k_; }
  void add(double energy, std::span<const Site> path);
  void merge(const LowestK& other);
  std::vector<RankedPath> sorted() const;

 private:
  int k_;
  std::vector<RankedPath> heap_;  // max-heap on (energy, path)
};

struct LandscapePoint {
  int rank;
  double q;      // overlap with the rank-1 structure's contacts
  double delta;  // energy above the rank-1 structure
};

// `ranked` must be sorted ascending; ranks start at 1.
std::vector<LandscapePoint> landscape(std::span<const RankedPath> ranked, const Lattice& lattice);

class DosVisitor : public PathVisitor {
 public:
  DosVisitor(const Lattice& lattice, const Sequence& seq, const ContactMatrix& matrix);

  std::string tag() const override { return "dos"; }
  std::unique_ptr<PathVisitor> fresh() const override;
  void visit(std::span<const Site> path) override;
  void merge(PathVisitor& other) override;
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  const DensityOfStates& dos() const { return dos_; }

 private:
  const Lattice* lattice_;
  std::shared_ptr<const PairEnergyTable> pairs_;
  DensityOfStates dos_;
};

class LowestKVisitor : public PathVisitor {
 public:
  LowestKVisitor(const Lattice& lattice, const Sequence& seq, const ContactMatrix& matrix, int k);

  std::string tag() const override { return "lowest_k"; }
  std::unique_ptr<PathVisitor> fresh() const override;
  void visit(std::span<const Site> path) override;
  void merge(PathVisitor& other) override;
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  const LowestK& lowest() const { return lowest_; }

 private:
  const Lattice* lattice_;
  std::shared_ptr<const PairEnergyTable> pairs_;
  LowestK lowest_;
};

// Histogram of contacts per structure.
class ContactCountVisitor : public PathVisitor {
 public:
  explicit ContactCountVisitor(const Lattice& lattice) : lattice_(&lattice) {}

  std::string tag() const override { return "contacts"; }
  std::unique_ptr<PathVisitor> fresh() const override;
  void visit(std::span<const Site> path) override;
  void merge(PathVisitor& other) override;
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  const std::map<int, std::uint64_t>& histogram() const { return histogram_; }

 private:
  const Lattice* lattice_;
  std::map<int, std::uint64_t> histogram_;
};

}  // namespace compactfold
