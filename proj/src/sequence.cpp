#include "compactfold/sequence.hpp"

#include <cctype>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "compactfold/error.hpp"

namespace compactfold {

int amino_acid_index(char code) {
  const auto pos = kAminoAcids.find(code);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

Sequence::Sequence(std::string_view residues, std::string name) : name_(std::move(name)) {
  for (char c : residues) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    const int idx = amino_acid_index(c);
    if (idx < 0) {
      throw DataError(fmt::format("unknown amino-acid code '{}' in sequence {}", c,
                                  name_.empty() ? std::string("<unnamed>") : name_));
    }
    letters_.push_back(c);
    codes_.push_back(static_cast<std::uint8_t>(idx));
  }
  if (letters_.size() < 2) {
    throw DataError(fmt::format("sequence {} has {} residues; at least 2 are required",
                                name_.empty() ? std::string("<unnamed>") : name_,
                                letters_.size()));
  }
}

std::optional<std::string> Sequence::attribute(const std::string& key) const {
  const auto it = attributes_.find(key);
  if (it == attributes_.end()) return std::nullopt;
  return it->second;
}

void Sequence::set_attribute(std::string key, std::string value) {
  attributes_[std::move(key)] = std::move(value);
}

namespace {

struct PendingRecord {
  std::string name;
  std::map<std::string, std::string> attributes;
  std::string residues;
};

Sequence finish(PendingRecord& rec) {
  Sequence seq(rec.residues, rec.name);
  for (auto& [k, v] : rec.attributes) seq.set_attribute(k, v);
  return seq;
}

}  // namespace

std::vector<Sequence> read_sequences(std::istream& in) {
  std::vector<Sequence> out;
  std::optional<PendingRecord> pending;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line[first] == '>') {
      if (pending) out.push_back(finish(*pending));
      pending.emplace();
      std::istringstream header(line.substr(first + 1));
      header >> pending->name;
      std::string field;
      while (header >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        pending->attributes[field.substr(0, eq)] = field.substr(eq + 1);
      }
      continue;
    }
    if (pending) {
      pending->residues += line;
    } else {
      out.emplace_back(line, fmt::format("line{}", out.size() + 1));
    }
  }
  if (pending) out.push_back(finish(*pending));
  return out;
}

}  // namespace compactfold
