#include <doctest.h>

#include <fstream>
#include <random>
#include <string>
#include <sstream>

#include "compactfold/contact_matrix.hpp"
#include "compactfold/conformation.hpp"
#include "compactfold/error.hpp"
#include "compactfold/lattice.hpp"
#include "compactfold/sequence.hpp"
#include "oracles.hpp"
#include "paths.hpp"

using namespace compactfold;

namespace {

// Boustrophedon path through the whole box.
std::vector<Site> snake(const Lattice& lat) {
  std::vector<Site> path;
  for (int z = 0; z < lat.lz(); ++z)
    for (int yy = 0; yy < lat.ly(); ++yy) {
      const int y = z % 2 ? lat.ly() - 1 - yy : yy;
      for (int xx = 0; xx < lat.lx(); ++xx) {
        const int x = (yy + z * lat.ly()) % 2 ? lat.lx() - 1 - xx : xx;
        path.push_back(lat.site({x, y, z}));
      }
    }
  return path;
}

std::string letters(int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += kAminoAcids[(i * 7) % 20];
  return s;
}

}  // namespace

TEST_CASE("lattice numbering and adjacency") {
  const Lattice lat(4, 4, 3);
  CHECK(lat.site_count() == 48);
  CHECK(lat.edge_count() == 3 * 4 * 3 + 4 * 3 * 3 + 4 * 4 * 2);
  CHECK(lat.site({1, 2, 1}) == 1 + 4 * (2 + 4 * 1));
  for (int s = 0; s < lat.site_count(); ++s) {
    const Coord c = lat.coord(static_cast<Site>(s));
    CHECK(lat.site(c) == s);
    for (int t = 0; t < lat.site_count(); ++t)
      CHECK(lat.adjacent(static_cast<Site>(s), static_cast<Site>(t)) == oracle::neighbours({4, 4, 3}, s, t));
  }
  CHECK(lat.neighbors(0).size() == 3);
  CHECK(lat.parity(lat.site({1, 1, 1})) == 1);
}

TEST_CASE("lattice rejects bad dimensions") {
  CHECK_THROWS_AS(Lattice(0, 2, 2), DataError);
  CHECK_THROWS_AS(Lattice(5, 5, 3), DataError);
  CHECK_NOTHROW(Lattice(4, 4, 4));
}

TEST_CASE("sequence parsing") {
  std::istringstream in("# comment\n>first emin=-1.5 topology=A\nACDE\nFG\n>second\nWY\n");
  const auto seqs = read_sequences(in);
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[0].name() == "first");
  CHECK(seqs[0].letters() == "ACDEFG");
  CHECK(seqs[0].attribute("emin") == "-1.5");
  CHECK(seqs[0].attribute("topology") == "A");
  CHECK_FALSE(seqs[1].attribute("emin"));
  CHECK(seqs[1].code(0) == amino_acid_index('W'));
  CHECK_THROWS_AS(Sequence("ACBX"), DataError);
  CHECK_THROWS_AS(Sequence("A"), DataError);
}

TEST_CASE("benchmark sequences are 48 residues each") {
  std::ifstream in(testing_paths::data("benchmark_sequences.fasta"));
  const auto seqs = read_sequences(in);
  REQUIRE(seqs.size() == 6);
  const double emin[] = {-25.85, -25.92, -26.09, -25.87, -26.15, -26.24};
  for (int k = 0; k < 6; ++k) {
    CHECK(seqs[k].length() == 48);
    CHECK(std::stod(*seqs[k].attribute("emin")) == emin[k]);
  }
}

TEST_CASE("contact matrix matches an independent reader") {
  const auto path = testing_paths::data("mj1985.txt");
  std::ifstream in(path);
  const ContactMatrix m = load_contact_matrix(in);
  const auto table = oracle::read_table(path.string());
  CHECK(table.size() == 400);
  for (char a : kAminoAcids)
    for (char b : kAminoAcids) {
      CHECK(m.at(a, b) == table.at({a, b}));
      CHECK(m.at(a, b) == m.at(b, a));
    }
}

TEST_CASE("contact matrix rejects gaps and conflicts") {
  auto full = [](const std::string& extra, bool skip_last) {
    std::string text = "ACDEFGHIKLMNPQRSTVWY\n";
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = i; j < 20; ++j) {
        if (skip_last && i == 19 && j == 19) continue;
        text += std::string{kAminoAcids[i], ' ', kAminoAcids[j]} + " -0.5\n";
      }
    return text + extra;
  };
  {
    std::istringstream in(full("", false));
    CHECK(load_contact_matrix(in).at('Y', 'A') == -0.5);
  }
  {
    std::istringstream in(full("", true));
    CHECK_THROWS_AS(load_contact_matrix(in), DataError);
  }
  {
    std::istringstream in(full("C A -0.25\n", false));
    CHECK_THROWS_AS(load_contact_matrix(in), DataError);
  }
  {
    std::istringstream in(full("C A -0.5\n", false));
    CHECK_NOTHROW(load_contact_matrix(in));
  }
}

TEST_CASE("conformation validity reports") {
  const Lattice lat(2, 2, 2);
  CHECK(validate_conformation(std::vector<Site>{0, 1, 3, 2, 6, 7, 5, 4}, lat).valid());
  const auto repeated = validate_conformation(std::vector<Site>{0, 1, 3, 2, 0, 4, 5, 7}, lat);
  REQUIRE_FALSE(repeated.valid());
  CHECK(repeated.violations[0].kind == ConformationViolation::Kind::kRepeatedSite);
  const auto diagonal = validate_conformation(std::vector<Site>{0, 3, 1, 5, 4, 6, 7, 2}, lat);
  REQUIRE_FALSE(diagonal.valid());
  CHECK(diagonal.violations[0].kind == ConformationViolation::Kind::kNotAdjacent);
  CHECK(diagonal.violations[0].residue == 0);
  const auto out = validate_conformation(std::vector<Site>{0, 1, 9}, lat);
  REQUIRE_FALSE(out.valid());
  CHECK(out.violations[0].kind == ConformationViolation::Kind::kOutOfRange);
  CHECK_THROWS_AS(require_valid(std::vector<Site>{0, 3}, lat), DataError);
}

TEST_CASE("uniform matrix energy counts contacts") {
  const ContactMatrix uniform = ContactMatrix::uniform(-1.0);
  for (auto [x, y, z, contacts] : {std::array{4, 4, 3, 57}, std::array{2, 2, 2, 5}, std::array{3, 3, 2, 16}}) {
    const Lattice lat(x, y, z);
    const auto path = snake(lat);
    REQUIRE(validate_conformation(path, lat).valid());
    const Sequence seq(letters(lat.site_count()));
    CHECK(oracle::contacts({x, y, z}, {path.begin(), path.end()}) == contacts);
    CHECK(contact_count(path, lat) == contacts);
    CHECK(chain_energy(Conformation(path), lat, seq, uniform) == -contacts);
  }
}

TEST_CASE("chain energy agrees with the oracle on random paths") {
  const auto matrix_path = testing_paths::data("mj1985.txt");
  std::ifstream in(matrix_path);
  const ContactMatrix m = load_contact_matrix(in);
  const auto table = oracle::read_table(matrix_path.string());
  std::mt19937_64 rng(7);
  for (oracle::Dims d : {oracle::Dims{2, 2, 2}, oracle::Dims{3, 3, 2}, oracle::Dims{2, 3, 4}}) {
    const Lattice lat(d[0], d[1], d[2]);
    const std::string letters_ = letters(lat.site_count());
    const Sequence seq(letters_);
    for (int trial = 0; trial < 50; ++trial) {
      const auto p = oracle::random_path(d, rng);
      const std::vector<Site> path(p.begin(), p.end());
      CHECK(chain_energy(Conformation(path), lat, seq, m) == oracle::contact_energy(d, p, letters_, table));
      CHECK(contact_count(path, lat) == lat.edge_count() - (lat.site_count() - 1));
    }
  }
}

TEST_CASE("contact order and nativeness") {
  const Lattice lat(2, 2, 2);
  const Conformation c(std::vector<Site>{0, 1, 3, 2, 6, 7, 5, 4});
  const ContactSet set = contact_set(c, lat);
  ContactSet expected;
  for (int i = 0; i < 8; ++i)
    for (int j = i + 2; j < 8; ++j)
      if (lat.adjacent(c[i], c[j])) expected.emplace_back(i, j);
  CHECK(set == expected);
  double sep = 0;
  for (auto [i, j] : expected) sep += j - i;
  CHECK(contact_order(set) == doctest::Approx(sep / expected.size()));
  CHECK(nativeness(set, set) == 1.0);
  CHECK(nativeness(ContactSet{}, set) == 0.0);
  CHECK_THROWS_AS(nativeness(set, ContactSet{}), DataError);
  CHECK_THROWS_AS(contact_order(ContactSet{}), DataError);
}

TEST_CASE("path hex round trip") {
  const std::vector<Site> path{0, 1, 17, 47};
  CHECK(path_to_hex(path) == "0001112f");
  CHECK(path_from_hex("0001112f") == path);
  CHECK_THROWS_AS(path_from_hex("0g"), DataError);
  CHECK_THROWS_AS(path_from_hex("000"), DataError);
}
