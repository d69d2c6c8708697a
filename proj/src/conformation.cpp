#include "compactfold/conformation.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "compactfold/error.hpp"

namespace compactfold {

std::string ValidityReport::describe() const {
  if (violations.empty()) return "valid";
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.message;
  }
  return out;
}

ValidityReport validate_conformation(std::span<const Site> path, const Lattice& lattice) {
  using Kind = ConformationViolation::Kind;
  ValidityReport report;
  std::vector<int> first_visit(lattice.site_count(), -1);
  for (int i = 0; i < static_cast<int>(path.size()); ++i) {
    const int s = path[i];
    if (s >= lattice.site_count()) {
      report.violations.push_back(
          {Kind::kOutOfRange, i, fmt::format("residue {}: site {} out of range", i, s)});
      continue;
    }
    if (first_visit[s] >= 0) {
      report.violations.push_back(
          {Kind::kRepeatedSite, i,
           fmt::format("residue {}: site {} already used by residue {}", i, s, first_visit[s])});
    } else {
      first_visit[s] = i;
    }
    if (i > 0 && path[i - 1] < lattice.site_count() && !lattice.adjacent(path[i - 1], path[i])) {
      report.violations.push_back(
          {Kind::kNotAdjacent, i - 1,
           fmt::format("bond ({},{}): sites {} and {} are not nearest neighbours", i - 1, i,
                       path[i - 1], path[i])});
    }
  }
  return report;
}

void require_valid(std::span<const Site> path, const Lattice& lattice) {
  const auto report = validate_conformation(path, lattice);
  if (!report.valid()) throw DataError("invalid conformation: " + report.violations.front().message);
}

namespace {

std::array<int, kMaxSites> residue_at_site(std::span<const Site> path) {
  std::array<int, kMaxSites> pos;
  pos.fill(-1);
  for (int i = 0; i < static_cast<int>(path.size()); ++i) pos[path[i]] = i;
  return pos;
}

}  // namespace

ContactSet contact_set(const Conformation& conf, const Lattice& lattice) {
  require_valid(conf.path(), lattice);
  const auto pos = residue_at_site(conf.path());
  ContactSet out;
  for (const auto& [a, b] : lattice.edges()) {
    const int i = pos[a];
    const int j = pos[b];
    if (i < 0 || j < 0) continue;
    if (std::abs(i - j) > 1) out.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(out.begin(), out.end());
  return out;
}

int contact_count(std::span<const Site> path, const Lattice& lattice) {
  const auto pos = residue_at_site(path);
  int count = 0;
  for (const auto& [a, b] : lattice.edges()) {
    const int i = pos[a];
    const int j = pos[b];
    if (i >= 0 && j >= 0 && std::abs(i - j) > 1) ++count;
  }
  return count;
}

double contact_order(const ContactSet& contacts) {
  if (contacts.empty()) throw DataError("contact order is undefined for a structure without contacts");
  long total = 0;
  for (const auto& [i, j] : contacts) total += std::abs(j - i);
  return static_cast<double>(total) / static_cast<double>(contacts.size());
}

double contact_order(const Conformation& conf, const Lattice& lattice) {
  return contact_order(contact_set(conf, lattice));
}

double nativeness(const ContactSet& contacts, const ContactSet& native) {
  if (native.empty()) throw DataError("nativeness needs a non-empty native contact set");
  ContactSet a = contacts;
  ContactSet b = native;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  ContactSet shared;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
  return static_cast<double>(shared.size()) / static_cast<double>(b.size());
}

double nativeness(const Conformation& conf, const ContactSet& native, const Lattice& lattice) {
  return nativeness(contact_set(conf, lattice), native);
}

PairEnergyTable::PairEnergyTable(const Sequence& seq, const ContactMatrix& matrix)
    : n_(seq.length()), table_(static_cast<std::size_t>(n_) * n_) {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) table_[i * n_ + j] = matrix(seq.code(i), seq.code(j));
}

ContactScore score_contacts(std::span<const Site> path, const Lattice& lattice,
                            const PairEnergyTable& pairs) {
  const auto pos = residue_at_site(path);
  ContactScore score;
  double acc = 0.0;
  const int n = static_cast<int>(path.size());
  for (int i = 0; i < n; ++i) {
    std::array<int, 6> partners;
    int count = 0;
    for (Site m : lattice.neighbors(path[i])) {
      const int j = pos[m];
      if (j > i + 1) partners[count++] = j;
    }
    std::sort(partners.begin(), partners.begin() + count);
    for (int k = 0; k < count; ++k) acc += pairs(i, partners[k]);
    score.contacts += count;
  }
  score.energy = acc;
  return score;
}

double chain_energy(const Conformation& conf, const Lattice& lattice, const Sequence& seq,
                    const ContactMatrix& matrix) {
  if (conf.length() != seq.length()) {
    throw DataError(fmt::format("conformation has {} residues but the sequence has {}",
                                conf.length(), seq.length()));
  }
  require_valid(conf.path(), lattice);
  return score_contacts(conf.path(), lattice, PairEnergyTable(seq, matrix)).energy;
}

std::string path_to_hex(std::span<const Site> path) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(path.size() * 2);
  for (Site s : path) {
    out.push_back(kDigits[s >> 4]);
    out.push_back(kDigits[s & 15]);
  }
  return out;
}

std::vector<Site> path_from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw DataError(fmt::format("odd-length path hex '{}'", hex));
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw DataError(fmt::format("bad hex digit '{}' in path '{}'", c, hex));
  };
  std::vector<Site> out;
  for (std::size_t k = 0; k < hex.size(); k += 2)
    out.push_back(static_cast<Site>(nibble(hex[k]) * 16 + nibble(hex[k + 1])));
  return out;
}

}  // namespace compactfold
