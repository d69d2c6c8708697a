#pragma once

#include <array>
#include <iosfwd>
#include <string>

#include "compactfold/sequence.hpp"

namespace compactfold {

// Symmetric 20x20 table of residue-residue contact energies e(a,b).
// Negative values are attractive; a contact adds e(a,b) to the chain energy.
class ContactMatrix {
 public:
  // All entries equal to `value`; useful for geometry checks.
  static ContactMatrix uniform(double value);

  double operator()(int a, int b) const { return table_[a * 20 + b]; }
  double at(char a, char b) const;

  // Alphabet order as listed in the source file (kAminoAcids for uniform()).
  const std::string& source_alphabet() const { return alphabet_; }

 private:
  std::array<double, 400> table_{};
  std::string alphabet_;

  friend ContactMatrix load_contact_matrix(std::istream& in);
};

// Text format: '#' comments; the first data line lists the 20 one-letter
// codes; every following line is "A B value". Either triangle (or both) may be
// given; a pair listed twice with different values is rejected, as is any of
// the 210 unordered pairs left unspecified.
ContactMatrix load_contact_matrix(std::istream& in);

}  // namespace compactfold
