#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "compactfold/contact_matrix.hpp"
#include "compactfold/conformation.hpp"
#include "compactfold/error.hpp"
#include "compactfold/qubo.hpp"
#include "oracles.hpp"
#include "paths.hpp"

using namespace compactfold;

namespace {

struct Fixture {
  ContactMatrix matrix;
  oracle::Table table;
  Fixture() {
    const auto path = testing_paths::data("mj1985.txt");
    std::ifstream in(path);
    matrix = load_contact_matrix(in);
    table = oracle::read_table(path.string());
  }
};

std::string pick_letters(int n, std::mt19937_64& rng) {
  std::string s;
  for (int i = 0; i < n; ++i) s += kAminoAcids[rng() % 20];
  return s;
}

std::vector<std::uint8_t> random_bits(std::size_t n, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(density);
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = coin(rng);
  return bits;
}

}  // namespace

TEST_CASE_FIXTURE(Fixture, "model size on the 4x4x3 box") {
  const Lattice lat(4, 4, 3);
  std::mt19937_64 rng(3);
  const Sequence seq(pick_letters(48, rng));
  const QuboModel model = build_qubo(seq, lat, ContactMatrix::uniform(-1.0), {});
  const std::size_t n = 48;
  const std::size_t pairs_2_apart = n * (n - 1) / 2 - (n - 1);
  const std::size_t contact = pairs_2_apart * 2 * lat.edge_count();
  const std::size_t one_site = n * (n * (n - 1) / 2);
  const std::size_t self_avoid = n * (n * (n - 1) / 2);
  const std::size_t far_pairs = n * n - n - 2 * lat.edge_count();
  const std::size_t connectivity = (n - 1) * far_pairs;
  CHECK(model.n_bits == 2304);
  CHECK(model.quadratic.size() == contact + one_site + self_avoid + connectivity);
  CHECK(model.nonzero_linear() == 2304);
  CHECK(model.constant == 1.5 * 48);
}

TEST_CASE_FIXTURE(Fixture, "coefficients match second differences of the closed forms") {
  std::mt19937_64 rng(11);
  for (oracle::Dims d : {oracle::Dims{2, 2, 2}, oracle::Dims{2, 2, 3}}) {
    const Lattice lat(d[0], d[1], d[2]);
    const std::string letters = pick_letters(lat.site_count(), rng);
    const LagrangeParams lambda{1.5, 2.0, 2.0};
    const QuboModel model = build_qubo(Sequence(letters), lat, matrix, lambda);
    auto total = [&](const std::vector<std::uint8_t>& bits) {
      const auto t = oracle::terms(d, bits, letters, table);
      return t.emj + lambda.one_site * t.e1 + lambda.self_avoid * t.e2 + lambda.connectivity * t.e3;
    };
    const std::size_t n = model.n_bits;
    std::vector<std::uint8_t> bits(n, 0);
    const double e0 = total(bits);
    CHECK(model.constant == doctest::Approx(e0));
    std::vector<double> single(n);
    for (std::size_t a = 0; a < n; ++a) {
      bits[a] = 1;
      single[a] = total(bits);
      bits[a] = 0;
      CHECK(model.linear[a] == doctest::Approx(single[a] - e0));
    }
    std::map<std::pair<std::size_t, std::size_t>, double> quad;
    for (const auto& q : model.quadratic) {
      CHECK(q.i < q.j);
      quad[{q.i, q.j}] = q.coeff;
    }
    CHECK(quad.size() == model.quadratic.size());
    int mismatches = 0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        bits[a] = bits[b] = 1;
        const double expected = total(bits) - single[a] - single[b] + e0;
        bits[a] = bits[b] = 0;
        const auto it = quad.find({a, b});
        const double got = it == quad.end() ? 0.0 : it->second;
        if (std::abs(got - expected) > 1e-12) ++mismatches;
        if (it != quad.end() && it->second == 0.0) ++mismatches;
      }
    CHECK(mismatches == 0);
  }
}

TEST_CASE_FIXTURE(Fixture, "encoded conformations have zero penalties") {
  std::mt19937_64 rng(5);
  for (oracle::Dims d : {oracle::Dims{2, 2, 2}, oracle::Dims{3, 3, 2}}) {
    const Lattice lat(d[0], d[1], d[2]);
    const std::string letters = pick_letters(lat.site_count(), rng);
    const Sequence seq(letters);
    for (int trial = 0; trial < 30; ++trial) {
      const auto p = oracle::random_path(d, rng);
      const Conformation conf(std::vector<Site>(p.begin(), p.end()));
      const BitState bits = encode(conf, lat);
      CHECK(bits.popcount() == static_cast<std::size_t>(lat.site_count()));
      const TermEnergies t = eval_terms(bits, seq, lat, matrix);
      CHECK(t.penalties_zero());
      CHECK(t.contact == chain_energy(conf, lat, seq, matrix));
      const DecodeResult back = decode(bits, lat);
      REQUIRE(back.ok());
      CHECK(*back.conformation == conf);
    }
  }
}

TEST_CASE_FIXTURE(Fixture, "closed-form terms agree with the oracle on random bits") {
  std::mt19937_64 rng(9);
  const oracle::Dims d{2, 2, 3};
  const Lattice lat(d[0], d[1], d[2]);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 11);
    const std::string letters = pick_letters(n, rng);
    const Sequence seq(letters);
    BitState bits(n, lat.site_count(), random_bits(static_cast<std::size_t>(n) * 12, 0.1, rng));
    const TermEnergies got = eval_terms(bits, seq, lat, matrix);
    const auto want = oracle::terms(d, {bits.bits().begin(), bits.bits().end()}, letters, table);
    CHECK(got.contact == doctest::Approx(want.emj).epsilon(1e-12));
    CHECK(got.one_site == want.e1);
    CHECK(got.self_avoid == want.e2);
    CHECK(got.connectivity == want.e3);
    const QuboModel model = build_qubo(seq, lat, matrix, {1.5, 2.0, 2.0});
    CHECK(model.energy(bits.bits()) == doctest::Approx(got.total({1.5, 2.0, 2.0})).epsilon(1e-12));
    const auto split = model.term_energies(bits.bits());
    REQUIRE(split);
    CHECK(split->one_site == got.one_site);
    CHECK(split->self_avoid == got.self_avoid);
    CHECK(split->connectivity == got.connectivity);
  }
}

TEST_CASE("simple closed-form cases") {
  const Lattice lat(2, 2, 2);
  const Sequence seq("ACDEFGHI");
  const ContactMatrix m = ContactMatrix::uniform(-1.0);
  BitState bits(8, 8);
  TermEnergies t = eval_terms(bits, seq, lat, m);
  CHECK(t.contact == 0);
  CHECK(t.one_site == 8);
  CHECK(t.self_avoid == 0);
  CHECK(t.connectivity == 0);
  bits.set(1, 0, true);
  bits.set(2, 0, true);
  t = eval_terms(bits, seq, lat, m);
  CHECK(t.self_avoid == 1);
  CHECK(t.connectivity == 0);

  const QuboModel zero = build_qubo(seq, lat, ContactMatrix::uniform(0.0), {0, 0, 0});
  CHECK(zero.constant == 0);
  for (double c : zero.linear) CHECK(c == 0);
  for (const auto& q : zero.quadratic) CHECK(q.coeff == 0);
}

TEST_CASE("decode names the violated constraint") {
  const Lattice lat(2, 2, 2);
  const Conformation conf(std::vector<Site>{0, 1, 3, 2, 6, 7, 5, 4});
  {
    BitState bits = encode(conf, lat);
    bits.set(5, 0, true);
    const auto r = decode(bits, lat);
    CHECK_FALSE(r.ok());
    bool named = false;
    for (const auto& v : r.violations)
      named |= v.kind == DecodeViolation::Kind::kOneSite && v.residue == 5;
    CHECK(named);
  }
  {
    BitState bits(8, 8);
    const std::vector<Site> sites{0, 1, 3, 4, 6, 7, 5, 2};
    for (int i = 0; i < 8; ++i) bits.set(i, sites[i], true);
    const auto r = decode(bits, lat);
    CHECK_FALSE(r.ok());
    bool named = false;
    for (const auto& v : r.violations)
      named |= v.kind == DecodeViolation::Kind::kConnectivity && v.residue == 2;
    CHECK(named);
  }
}

TEST_CASE_FIXTURE(Fixture, "export and import round trip") {
  const Lattice lat(2, 2, 2);
  const QuboModel model = build_qubo(Sequence("WYFLKRDE"), lat, matrix, {1.25, 2.5, 1.75});
  std::stringstream text;
  export_qubo(model, text);
  const QuboModel back = import_qubo(text);
  CHECK(back.n_bits == model.n_bits);
  CHECK(back.constant == model.constant);
  CHECK(back.linear == model.linear);
  CHECK(back.quadratic == model.quadratic);
  std::istringstream bad("qubo n_bits 2 constant 0\nl 0 1\nl 1 1\nq 1 0 2\n");
  CHECK_THROWS_AS(import_qubo(bad), DataError);
}
