#include "compactfold/contact_matrix.hpp"

#include <istream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "compactfold/error.hpp"

namespace compactfold {

ContactMatrix ContactMatrix::uniform(double value) {
  ContactMatrix m;
  m.table_.fill(value);
  m.alphabet_ = std::string(kAminoAcids);
  return m;
}

double ContactMatrix::at(char a, char b) const {
  const int ia = amino_acid_index(a);
  const int ib = amino_acid_index(b);
  if (ia < 0 || ib < 0) throw DataError(fmt::format("unknown amino-acid pair ({},{})", a, b));
  return (*this)(ia, ib);
}

ContactMatrix load_contact_matrix(std::istream& in) {
  ContactMatrix m;
  std::array<std::optional<double>, 400> seen{};
  std::string line;
  int line_no = 0;
  bool have_alphabet = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;

    if (!have_alphabet) {
      std::string alphabet = first;
      std::string more;
      while (fields >> more) alphabet += more;
      if (alphabet.size() != 20) {
        throw DataError(fmt::format("line {}: alphabet line must list 20 codes, found {}",
                                    line_no, alphabet.size()));
      }
      std::array<bool, 20> used{};
      for (char c : alphabet) {
        const int idx = amino_acid_index(c);
        if (idx < 0) throw DataError(fmt::format("line {}: unknown code '{}' in alphabet", line_no, c));
        if (used[idx]) throw DataError(fmt::format("line {}: code '{}' repeated in alphabet", line_no, c));
        used[idx] = true;
      }
      m.alphabet_ = alphabet;
      have_alphabet = true;
      continue;
    }

    std::string second;
    double value = 0.0;
    if (first.size() != 1 || !(fields >> second) || second.size() != 1 || !(fields >> value)) {
      throw DataError(fmt::format("line {}: expected 'A B value'", line_no));
    }
    std::string extra;
    if (fields >> extra) throw DataError(fmt::format("line {}: trailing text '{}'", line_no, extra));
    const int a = amino_acid_index(first[0]);
    const int b = amino_acid_index(second[0]);
    if (a < 0 || b < 0) {
      throw DataError(fmt::format("line {}: unknown amino-acid code in pair ({},{})", line_no,
                                  first, second));
    }
    auto& slot = seen[a * 20 + b];
    if (slot && *slot != value) {
      throw DataError(fmt::format("line {}: conflicting values for pair ({},{}): {} vs {}", line_no,
                                  first, second, *slot, value));
    }
    slot = value;
    seen[b * 20 + a] = value;
  }
  if (!have_alphabet) throw DataError("contact matrix file has no alphabet line");

  // Report the first missing pair in file-alphabet order.
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = i; j < 20; ++j) {
      const int a = amino_acid_index(m.alphabet_[i]);
      const int b = amino_acid_index(m.alphabet_[j]);
      if (!seen[a * 20 + b]) {
        throw DataError(fmt::format("missing contact energy for pair ({},{})", m.alphabet_[i],
                                    m.alphabet_[j]));
      }
      m.table_[a * 20 + b] = *seen[a * 20 + b];
      m.table_[b * 20 + a] = *seen[a * 20 + b];
    }
  }
  return m;
}

}  // namespace compactfold
