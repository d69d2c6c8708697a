#include "compactfold/qubo.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "compactfold/error.hpp"

namespace compactfold {

BitState::BitState(int residues, int sites, std::vector<std::uint8_t> bits)
    : residues_(residues), sites_(sites), bits_(std::move(bits)) {
  if (bits_.size() != static_cast<std::size_t>(residues) * sites) {
    throw DataError(fmt::format("bit state has {} bits, expected {}x{}={}", bits_.size(), residues,
                                sites, static_cast<std::size_t>(residues) * sites));
  }
}

std::size_t BitState::popcount() const {
  return static_cast<std::size_t>(std::count_if(bits_.begin(), bits_.end(), [](auto b) { return b != 0; }));
}

void validate(const LagrangeParams& lambda) {
  if (!(lambda.one_site >= 0) || !(lambda.self_avoid >= 0) || !(lambda.connectivity >= 0)) {
    throw DataError(fmt::format("Lagrange parameters must be non-negative, got ({}, {}, {})",
                                lambda.one_site, lambda.self_avoid, lambda.connectivity));
  }
}

double QuboModel::energy(std::span<const std::uint8_t> bits) const {
  if (bits.size() != n_bits) {
    throw DataError(fmt::format("state has {} bits, model has {}", bits.size(), n_bits));
  }
  double e = constant;
  for (std::size_t k = 0; k < n_bits; ++k)
    if (bits[k]) e += linear[k];
  for (const auto& q : quadratic)
    if (bits[q.i] && bits[q.j]) e += q.coeff;
  return e;
}

std::optional<TermEnergies> QuboModel::term_energies(std::span<const std::uint8_t> bits) const {
  if (!breakdown) return std::nullopt;
  return TermEnergies{breakdown->contact.energy(bits), breakdown->one_site.energy(bits),
                      breakdown->self_avoid.energy(bits), breakdown->connectivity.energy(bits)};
}

std::size_t QuboModel::nonzero_linear() const {
  return static_cast<std::size_t>(std::count_if(linear.begin(), linear.end(), [](double c) { return c != 0.0; }));
}

namespace {

QuboModel empty_model(std::size_t n_bits) {
  QuboModel m;
  m.n_bits = n_bits;
  m.linear.assign(n_bits, 0.0);
  return m;
}

// Site pairs (n, m), m != n, that are not nearest neighbours: the sites a
// bonded partner must avoid.
std::vector<std::vector<int>> far_sites(const Lattice& lattice) {
  const int L = lattice.site_count();
  std::vector<std::vector<int>> out(L);
  for (int n = 0; n < L; ++n)
    for (int m = 0; m < L; ++m)
      if (m != n && !lattice.adjacent(static_cast<Site>(n), static_cast<Site>(m))) out[n].push_back(m);
  return out;
}

}  // namespace

QuboModel build_qubo(const Sequence& seq, const Lattice& lattice, const ContactMatrix& matrix,
                     const LagrangeParams& lambda) {
  validate(lambda);
  const int N = seq.length();
  const int L = lattice.site_count();
  const std::size_t n_bits = static_cast<std::size_t>(N) * L;
  auto idx = [L](int i, int n) { return static_cast<std::uint32_t>(i * L + n); };
  const PairEnergyTable pairs(seq, matrix);

  auto parts = std::make_shared<TermBreakdown>();
  parts->lambda = lambda;
  parts->residues = N;
  parts->sites = L;

  // Contact term: e(a_i,a_j) b_{i,n} b_{j,m} for |i-j| > 1 and n, m neighbours.
  // Loop order i, n, j, m yields ascending (flat_i, flat_j).
  QuboModel contact = empty_model(n_bits);
  for (int i = 0; i < N; ++i)
    for (int n = 0; n < L; ++n)
      for (int j = i + 2; j < N; ++j) {
        const double e = pairs(i, j);
        if (e == 0.0) continue;
        for (Site m : lattice.neighbors(static_cast<Site>(n))) contact.quadratic.push_back({idx(i, n), idx(j, m), e});
      }

  // (sum_n b_{i,n} - 1)^2 with b^2 = b: -b linear, +2 b b per site pair, +1 per residue.
  QuboModel one_site = empty_model(n_bits);
  std::fill(one_site.linear.begin(), one_site.linear.end(), -1.0);
  one_site.constant = N;
  for (int i = 0; i < N; ++i)
    for (int n = 0; n < L; ++n)
      for (int m = n + 1; m < L; ++m) one_site.quadratic.push_back({idx(i, n), idx(i, m), 2.0});

  QuboModel self_avoid = empty_model(n_bits);
  for (int i = 0; i < N; ++i)
    for (int n = 0; n < L; ++n)
      for (int j = i + 1; j < N; ++j) self_avoid.quadratic.push_back({idx(i, n), idx(j, n), 1.0});

  QuboModel connectivity = empty_model(n_bits);
  const auto far = far_sites(lattice);
  for (int i = 0; i + 1 < N; ++i)
    for (int n = 0; n < L; ++n)
      for (int m : far[n]) connectivity.quadratic.push_back({idx(i, n), idx(i + 1, m), 1.0});

  QuboModel total = empty_model(n_bits);
  total.constant = lambda.one_site * one_site.constant;
  for (std::size_t k = 0; k < n_bits; ++k) total.linear[k] = lambda.one_site * one_site.linear[k];

  std::vector<QuadraticEntry> all;
  all.reserve(contact.quadratic.size() + one_site.quadratic.size() + self_avoid.quadratic.size() +
              connectivity.quadratic.size());
  auto append = [&all](const QuboModel& part, double weight) {
    for (const auto& q : part.quadratic) all.push_back({q.i, q.j, weight * q.coeff});
  };
  append(contact, 1.0);
  append(one_site, lambda.one_site);
  append(self_avoid, lambda.self_avoid);
  append(connectivity, lambda.connectivity);
  std::stable_sort(all.begin(), all.end(), [](const QuadraticEntry& a, const QuadraticEntry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t k = 0; k < all.size();) {
    QuadraticEntry merged = all[k];
    std::size_t next = k + 1;
    for (; next < all.size() && all[next].i == merged.i && all[next].j == merged.j; ++next)
      merged.coeff += all[next].coeff;
    if (merged.coeff != 0.0) total.quadratic.push_back(merged);
    k = next;
  }

  parts->contact = std::move(contact);
  parts->one_site = std::move(one_site);
  parts->self_avoid = std::move(self_avoid);
  parts->connectivity = std::move(connectivity);
  total.breakdown = std::move(parts);
  return total;
}

TermEnergies eval_terms(const BitState& bits, const Sequence& seq, const Lattice& lattice,
                        const ContactMatrix& matrix) {
  const int N = seq.length();
  const int L = lattice.site_count();
  if (bits.residues() != N || bits.sites() != L) {
    throw DataError(fmt::format("bit state is {}x{}, expected {} residues x {} sites",
                                bits.residues(), bits.sites(), N, L));
  }
  std::vector<std::vector<int>> occupied(N);
  std::vector<long> per_site(L, 0);
  for (int i = 0; i < N; ++i)
    for (int n = 0; n < L; ++n)
      if (bits.get(i, n)) {
        occupied[i].push_back(n);
        ++per_site[n];
      }

  TermEnergies t;
  const PairEnergyTable pairs(seq, matrix);
  double acc = 0.0;
  for (int i = 0; i < N; ++i)
    for (int n : occupied[i])
      for (int j = i + 2; j < N; ++j)
        for (Site m : lattice.neighbors(static_cast<Site>(n)))
          if (bits.get(j, m)) acc += pairs(i, j);
  t.contact = acc;

  long e1 = 0;
  for (const auto& sites : occupied) {
    const long d = static_cast<long>(sites.size()) - 1;
    e1 += d * d;
  }
  t.one_site = static_cast<double>(e1);

  long e2 = 0;
  for (long k : per_site) e2 += k * (k - 1) / 2;
  t.self_avoid = static_cast<double>(e2);

  long e3 = 0;
  for (int i = 0; i + 1 < N; ++i)
    for (int n : occupied[i])
      for (int m : occupied[i + 1])
        if (m != n && !lattice.adjacent(static_cast<Site>(n), static_cast<Site>(m))) ++e3;
  t.connectivity = static_cast<double>(e3);
  return t;
}

BitState encode(const Conformation& conf, const Lattice& lattice) {
  require_valid(conf.path(), lattice);
  BitState bits(conf.length(), lattice.site_count());
  for (int i = 0; i < conf.length(); ++i) bits.set(i, conf[i], true);
  return bits;
}

DecodeResult decode(const BitState& bits, const Lattice& lattice) {
  using Kind = DecodeViolation::Kind;
  DecodeResult result;
  if (bits.sites() != lattice.site_count()) {
    throw DataError(fmt::format("bit state has {} sites per residue, lattice has {}", bits.sites(),
                                lattice.site_count()));
  }
  const int N = bits.residues();
  const int L = bits.sites();
  std::vector<std::vector<int>> occupied(N);
  std::vector<std::vector<int>> residents(L);
  for (int i = 0; i < N; ++i)
    for (int n = 0; n < L; ++n)
      if (bits.get(i, n)) {
        occupied[i].push_back(n);
        residents[n].push_back(i);
      }

  for (int i = 0; i < N; ++i) {
    if (occupied[i].size() != 1) {
      result.violations.push_back({Kind::kOneSite, i, -1,
                                   fmt::format("residue {} occupies {} sites", i, occupied[i].size())});
    }
  }
  for (int n = 0; n < L; ++n) {
    if (residents[n].size() > 1) {
      result.violations.push_back({Kind::kSelfAvoid, -1, n,
                                   fmt::format("site {} holds {} residues", n, residents[n].size())});
    }
  }
  for (int i = 0; i + 1 < N; ++i) {
    for (int n : occupied[i]) {
      bool broken = false;
      for (int m : occupied[i + 1])
        if (m != n && !lattice.adjacent(static_cast<Site>(n), static_cast<Site>(m))) broken = true;
      if (broken) {
        result.violations.push_back(
            {Kind::kConnectivity, i, -1, fmt::format("bond ({},{}) spans non-neighbouring sites", i, i + 1)});
        break;
      }
    }
  }
  if (result.violations.empty()) {
    std::vector<Site> path(N);
    for (int i = 0; i < N; ++i) path[i] = static_cast<Site>(occupied[i].front());
    result.conformation = Conformation(std::move(path));
  }
  return result;
}

void export_qubo(const QuboModel& model, std::ostream& out) {
  out << fmt::format("qubo n_bits {} constant {:.17g}\n", model.n_bits, model.constant);
  for (std::size_t k = 0; k < model.linear.size(); ++k)
    out << fmt::format("l {} {:.17g}\n", k, model.linear[k]);
  for (const auto& q : model.quadratic) out << fmt::format("q {} {} {:.17g}\n", q.i, q.j, q.coeff);
  if (!out) throw Error("failed writing QUBO model");
}

QuboModel import_qubo(std::istream& in) {
  QuboModel model;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::vector<bool> linear_seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string tag;
    if (!(fields >> tag)) continue;
    auto fail = [&](const std::string& why) {
      return DataError(fmt::format("QUBO line {}: {}", line_no, why));
    };
    if (!have_header) {
      std::string k1, k2;
      if (tag != "qubo" || !(fields >> k1 >> model.n_bits >> k2 >> model.constant) || k1 != "n_bits" ||
          k2 != "constant") {
        throw fail("expected header 'qubo n_bits <n> constant <c>'");
      }
      model.linear.assign(model.n_bits, 0.0);
      linear_seen.assign(model.n_bits, false);
      have_header = true;
      continue;
    }
    if (tag == "l") {
      std::size_t i = 0;
      double c = 0;
      if (!(fields >> i >> c)) throw fail("expected 'l <i> <coeff>'");
      if (i >= model.n_bits) throw fail("bit index out of range");
      if (linear_seen[i]) throw fail("duplicate linear entry");
      linear_seen[i] = true;
      model.linear[i] = c;
    } else if (tag == "q") {
      std::uint64_t i = 0, j = 0;
      double c = 0;
      if (!(fields >> i >> j >> c)) throw fail("expected 'q <i> <j> <coeff>'");
      if (!(i < j)) throw fail("quadratic entries need i < j");
      if (j >= model.n_bits) throw fail("bit index out of range");
      model.quadratic.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), c});
    } else {
      throw fail(fmt::format("unknown record '{}'", tag));
    }
  }
  if (!have_header) throw DataError("QUBO file has no header");
  std::sort(model.quadratic.begin(), model.quadratic.end(),
            [](const QuadraticEntry& a, const QuadraticEntry& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  for (std::size_t k = 1; k < model.quadratic.size(); ++k) {
    if (model.quadratic[k].i == model.quadratic[k - 1].i && model.quadratic[k].j == model.quadratic[k - 1].j) {
      throw DataError(fmt::format("duplicate quadratic entry ({},{})", model.quadratic[k].i, model.quadratic[k].j));
    }
  }
  return model;
}

}  // namespace compactfold
