#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "compactfold/contact_matrix.hpp"
#include "compactfold/lattice.hpp"
#include "compactfold/sequence.hpp"

namespace compactfold {

// Ordered list of sites r_0..r_{N-1}, one per residue.
class Conformation {
 public:
  Conformation() = default;
  explicit Conformation(std::vector<Site> path) : path_(std::move(path)) {}

  std::span<const Site> path() const { return path_; }
  int length() const { return static_cast<int>(path_.size()); }
  Site operator[](int i) const { return path_[i]; }

  bool operator==(const Conformation&) const = default;
  auto operator<=>(const Conformation&) const = default;

 private:
  std::vector<Site> path_;
};

struct ConformationViolation {
  enum class Kind { kOutOfRange, kRepeatedSite, kNotAdjacent };
  Kind kind;
  int residue;  // offending residue (for kNotAdjacent: the first of the bond)
  std::string message;
};

struct ValidityReport {
  std::vector<ConformationViolation> violations;
  bool valid() const { return violations.empty(); }
  std::string describe() const;
};

ValidityReport validate_conformation(std::span<const Site> path, const Lattice& lattice);
inline ValidityReport validate_conformation(const Conformation& conf, const Lattice& lattice) {
  return validate_conformation(conf.path(), lattice);
}
// Throws DataError describing the first violation.
void require_valid(std::span<const Site> path, const Lattice& lattice);

// Residue pairs (i, j), i < j - 1, on nearest-neighbour sites. Sorted.
using ContactSet = std::vector<std::pair<int, int>>;

ContactSet contact_set(const Conformation& conf, const Lattice& lattice);
// Number of contacts; `path` is assumed valid.
int contact_count(std::span<const Site> path, const Lattice& lattice);

// Mean |i - j| over the contacts. Throws DataError for an empty set.
double contact_order(const ContactSet& contacts);
double contact_order(const Conformation& conf, const Lattice& lattice);

// Fraction of `native` contacts present in `contacts`. Throws for empty native.
double nativeness(const ContactSet& contacts, const ContactSet& native);
double nativeness(const Conformation& conf, const ContactSet& native, const Lattice& lattice);

// Residue-pair energies e(a_i, a_j) for one sequence, row-major N x N.
class PairEnergyTable {
 public:
  PairEnergyTable(const Sequence& seq, const ContactMatrix& matrix);
  int length() const { return n_; }
  double operator()(int i, int j) const { return table_[i * n_ + j]; }

 private:
  int n_;
  std::vector<double> table_;
};

struct ContactScore {
  double energy = 0.0;
  int contacts = 0;
};

// Sum of e(a_i,a_j) over contacts, accumulated with i ascending and, for each
// i, j ascending. Every energy in the library uses this order, so results
// agree bit for bit. `path` is assumed valid; sites not on the path are ignored.
ContactScore score_contacts(std::span<const Site> path, const Lattice& lattice,
                            const PairEnergyTable& pairs);

// Contact energy E_MJ of a conformation. Validates first.
double chain_energy(const Conformation& conf, const Lattice& lattice, const Sequence& seq,
                    const ContactMatrix& matrix);

// Path hex encoding: two lowercase hex digits per site.
std::string path_to_hex(std::span<const Site> path);
std::vector<Site> path_from_hex(std::string_view hex);

}  // namespace compactfold
