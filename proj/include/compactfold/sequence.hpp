#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace compactfold {

// The 20 canonical one-letter amino-acid codes, in the library's internal order.
inline constexpr std::string_view kAminoAcids = "ACDEFGHIKLMNPQRSTVWY";

// Index of a one-letter code in kAminoAcids, or -1.
int amino_acid_index(char code);

class Sequence {
 public:
  Sequence() = default;
  // Whitespace inside `residues` is ignored. Throws DataError on unknown codes
  // or fewer than two residues.
  explicit Sequence(std::string_view residues, std::string name = {});

  const std::string& name() const { return name_; }
  const std::string& letters() const { return letters_; }
  int length() const { return static_cast<int>(letters_.size()); }
  // kAminoAcids index of residue i.
  int code(int i) const { return codes_[i]; }

  // key=value pairs from a FASTA header, e.g. "emin=-26.15".
  const std::map<std::string, std::string>& attributes() const { return attributes_; }
  std::optional<std::string> attribute(const std::string& key) const;
  void set_attribute(std::string key, std::string value);

 private:
  std::string name_;
  std::string letters_;
  std::vector<std::uint8_t> codes_;
  std::map<std::string, std::string> attributes_;
};

// Reads a FASTA-style file: ">name key=value ..." headers followed by one or
// more sequence lines. Lines before the first header are one sequence each.
// '#' starts a comment line.
std::vector<Sequence> read_sequences(std::istream& in);

}  // namespace compactfold
