#include "compactfold/observables.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "compactfold/error.hpp"

namespace compactfold {

std::int64_t energy_key(double energy) {
  if (!std::isfinite(energy)) throw DataError("non-finite energy");
  return std::llround(energy * kEnergyResolution);
}

double key_energy(std::int64_t key) { return static_cast<double>(key) / kEnergyResolution; }

void DensityOfStates::add(double energy, std::uint64_t count) { add_key(energy_key(energy), count); }

void DensityOfStates::add_key(std::int64_t key, std::uint64_t count) {
  counts_[key] += count;
  total_ += count;
}

void DensityOfStates::merge(const DensityOfStates& other) {
  for (const auto& [key, count] : other.counts_) counts_[key] += count;
  total_ += other.total_;
}

std::vector<DensityOfStates::Bin> DensityOfStates::bins() const {
  std::vector<Bin> out;
  out.reserve(counts_.size());
  for (const auto& [key, count] : counts_) out.push_back({key_energy(key), count});
  return out;
}

std::vector<double> quantiles(const DensityOfStates& dos, std::span<const double> qs) {
  if (dos.empty()) throw DataError("quantiles of an empty density of states");
  std::vector<double> out;
  for (double q : qs) {
    if (!(q > 1.0)) throw DataError(fmt::format("quantile order must exceed 1, got {}", q));
    const long double threshold = static_cast<long double>(dos.total()) / q;
    std::uint64_t cumulative = 0;
    for (const auto& [key, count] : dos.keyed()) {
      cumulative += count;
      if (static_cast<long double>(cumulative) >= threshold) {
        out.push_back(key_energy(key));
        break;
      }
    }
  }
  return out;
}

LowestK::LowestK(int k) : k_(k) {
  if (k < 1) throw DataError(fmt::format("K must be at least 1, got {}", k));
}

void LowestK::add(double energy, std::span<const Site> path) {
  if (static_cast<int>(heap_.size()) == k_) {
    const RankedPath& worst = heap_.front();
    if (energy > worst.energy) return;
    if (energy == worst.energy &&
        !std::lexicographical_compare(path.begin(), path.end(), worst.path.begin(), worst.path.end()))
      return;
    std::pop_heap(heap_.begin(), heap_.end());
    heap_.pop_back();
  }
  heap_.push_back({energy, std::vector<Site>(path.begin(), path.end())});
  std::push_heap(heap_.begin(), heap_.end());
}

void LowestK::merge(const LowestK& other) {
  for (const auto& entry : other.heap_) add(entry.energy, entry.path);
}

std::vector<RankedPath> LowestK::sorted() const {
  std::vector<RankedPath> out = heap_;
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<LandscapePoint> landscape(std::span<const RankedPath> ranked, const Lattice& lattice) {
  std::vector<LandscapePoint> out;
  if (ranked.empty()) return out;
  const ContactSet native = contact_set(Conformation(ranked.front().path), lattice);
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const double q = nativeness(Conformation(ranked[r].path), native, lattice);
    out.push_back({static_cast<int>(r + 1), q, ranked[r].energy - ranked.front().energy});
  }
  return out;
}

namespace {

template <typename T>
T& same_kind(PathVisitor& other) {
  auto* p = dynamic_cast<T*>(&other);
  if (!p) throw std::logic_error("merging visitors of different kinds");
  return *p;
}

void expect_word(std::istream& in, const char* word) {
  std::string got;
  if (!(in >> got) || got != word)
    throw DataError(fmt::format("checkpoint: expected '{}', found '{}'", word, got));
}

}  // namespace

DosVisitor::DosVisitor(const Lattice& lattice, const Sequence& seq, const ContactMatrix& matrix)
    : lattice_(&lattice), pairs_(std::make_shared<PairEnergyTable>(seq, matrix)) {}

std::unique_ptr<PathVisitor> DosVisitor::fresh() const {
  auto out = std::make_unique<DosVisitor>(*this);
  out->dos_ = {};
  return out;
}

void DosVisitor::visit(std::span<const Site> path) {
  dos_.add(score_contacts(path, *lattice_, *pairs_).energy);
}

void DosVisitor::merge(PathVisitor& other) { dos_.merge(same_kind<DosVisitor>(other).dos_); }

void DosVisitor::save(std::ostream& out) const {
  fmt::print(out, "bins {}\n", dos_.keyed().size());
  for (const auto& [key, count] : dos_.keyed()) fmt::print(out, "{} {}\n", key, count);
}

void DosVisitor::load(std::istream& in) {
  expect_word(in, "bins");
  std::size_t n = 0;
  in >> n;
  DensityOfStates dos;
  for (std::size_t k = 0; k < n; ++k) {
    std::int64_t key = 0;
    std::uint64_t count = 0;
    if (!(in >> key >> count)) throw DataError("checkpoint: truncated density of states");
    dos.add_key(key, count);
  }
  dos_ = std::move(dos);
}

LowestKVisitor::LowestKVisitor(const Lattice& lattice, const Sequence& seq,
                               const ContactMatrix& matrix, int k)
    : lattice_(&lattice), pairs_(std::make_shared<PairEnergyTable>(seq, matrix)), lowest_(k) {}

std::unique_ptr<PathVisitor> LowestKVisitor::fresh() const {
  auto out = std::make_unique<LowestKVisitor>(*this);
  out->lowest_ = LowestK(lowest_.k());
  return out;
}

void LowestKVisitor::visit(std::span<const Site> path) {
  lowest_.add(score_contacts(path, *lattice_, *pairs_).energy, path);
}

void LowestKVisitor::merge(PathVisitor& other) {
  lowest_.merge(same_kind<LowestKVisitor>(other).lowest_);
}

void LowestKVisitor::save(std::ostream& out) const {
  const auto entries = lowest_.sorted();
  fmt::print(out, "k {} entries {}\n", lowest_.k(), entries.size());
  for (const auto& e : entries) fmt::print(out, "{:.17g} {}\n", e.energy, path_to_hex(e.path));
}

void LowestKVisitor::load(std::istream& in) {
  expect_word(in, "k");
  int k = 0;
  in >> k;
  if (k != lowest_.k()) throw DataError(fmt::format("checkpoint holds K={}, expected {}", k, lowest_.k()));
  expect_word(in, "entries");
  std::size_t n = 0;
  in >> n;
  LowestK lowest(k);
  for (std::size_t i = 0; i < n; ++i) {
    double energy = 0.0;
    std::string hex;
    if (!(in >> energy >> hex)) throw DataError("checkpoint: truncated lowest-K list");
    lowest.add(energy, path_from_hex(hex));
  }
  lowest_ = std::move(lowest);
}

std::unique_ptr<PathVisitor> ContactCountVisitor::fresh() const {
  return std::make_unique<ContactCountVisitor>(*lattice_);
}

void ContactCountVisitor::visit(std::span<const Site> path) {
  ++histogram_[contact_count(path, *lattice_)];
}

void ContactCountVisitor::merge(PathVisitor& other) {
  for (const auto& [c, n] : same_kind<ContactCountVisitor>(other).histogram_) histogram_[c] += n;
}

void ContactCountVisitor::save(std::ostream& out) const {
  fmt::print(out, "bins {}\n", histogram_.size());
  for (const auto& [c, n] : histogram_) fmt::print(out, "{} {}\n", c, n);
}

void ContactCountVisitor::load(std::istream& in) {
  expect_word(in, "bins");
  std::size_t n = 0;
  in >> n;
  std::map<int, std::uint64_t> h;
  for (std::size_t k = 0; k < n; ++k) {
    int c = 0;
    std::uint64_t count = 0;
    if (!(in >> c >> count)) throw DataError("checkpoint: truncated contact histogram");
    h[c] += count;
  }
  histogram_ = std::move(h);
}

}  // namespace compactfold
