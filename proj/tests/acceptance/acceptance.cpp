// Acceptance gates. Each criterion prints one line:
//   criterion <n> <PASS|FAIL> <name>: <evidence>
// and the process exits non-zero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "collect.hpp"
#include "compactfold/annealer.hpp"
#include "compactfold/archive.hpp"
#include "compactfold/contact_matrix.hpp"
#include "compactfold/conformation.hpp"
#include "compactfold/enumeration.hpp"
#include "compactfold/observables.hpp"
#include "compactfold/qubo.hpp"
#include "compactfold/sequence.hpp"
#include "compactfold/symmetry.hpp"
#include "oracles.hpp"
#include "paths.hpp"
#include "toy_qubo.hpp"

using namespace compactfold;

namespace {

// Tolerances and sample sizes.
constexpr int kC1Conformations = 10'008;  // 556 per sequence, six sequences per box
constexpr int kC1BitStates = 10'008;
constexpr double kC1Tolerance = 1e-9;
constexpr std::int64_t kC3SeedLen = 6;
constexpr std::uint64_t kC3PerSeed = 2'000;
constexpr std::size_t kC3Seeds = 40;
constexpr double kC4Tolerance = 1e-6;
static_assert(kC4Tolerance == kSuccessTolerance);
constexpr std::int64_t kC4SmokeSweeps = 10'000;
constexpr std::int64_t kC4FullSweeps = 80'000;
constexpr int kC4Runs = 10;
constexpr double kC4SmokeRate = 0.3;
constexpr long kC5Sweeps = 1'000'000;
constexpr int kC5Batches = 100;
constexpr double kC5Beta = 1.0;
constexpr double kC5MaxZ = 3.0;
constexpr int kC5FrozenSweeps = 10'000;
constexpr std::int64_t kC6Sweeps = 10'000;
constexpr int kC6Runs = 10;
constexpr double kC6Step = 0.25;

// Published minimum contact energies of the six benchmark sequences.
constexpr double kPublished[6] = {-25.85, -25.92, -26.09, -25.87, -26.15, -26.24};

// Lowest contact energy of sequence 5 found under the shipped matrix file by
// the annealer (conformation recorded in the README). It lies below the
// published value, which this matrix therefore cannot reproduce.
constexpr double kSeq5BestKnown = -26.45;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ContactMatrix mj_matrix() {
  std::ifstream in(testing_paths::data("mj1985.txt"));
  return load_contact_matrix(in);
}

oracle::Table mj_table() { return oracle::read_table(testing_paths::data("mj1985.txt").string()); }

std::vector<Sequence> benchmark() {
  std::ifstream in(testing_paths::data("benchmark_sequences.fasta"));
  return read_sequences(in);
}

std::string random_letters(int n, std::mt19937_64& rng) {
  std::string s;
  for (int i = 0; i < n; ++i) s += kAminoAcids[rng() % 20];
  return s;
}

// ---------------------------------------------------------------------------

Outcome encoding_equivalence() {
  const ContactMatrix matrix = mj_matrix();
  const oracle::Table table = mj_table();
  const LagrangeParams lambda{1.5, 2.0, 2.0};
  std::mt19937_64 rng(2024);
  const oracle::Dims boxes[] = {{2, 2, 2}, {3, 3, 2}, {3, 3, 3}};
  constexpr int kSequencesPerBox = 6;

  int conformations = 0;
  int conformation_failures = 0;
  int bit_states = 0;
  double worst = 0.0;
  for (const auto& d : boxes) {
    const Lattice lat(d[0], d[1], d[2]);
    const int per_sequence = kC1Conformations / 3 / kSequencesPerBox;
    for (int s = 0; s < kSequencesPerBox; ++s) {
      const std::string letters = random_letters(lat.site_count(), rng);
      const Sequence seq(letters);
      const QuboModel model = build_qubo(seq, lat, matrix, lambda);
      for (int k = 0; k < per_sequence; ++k) {
        const auto p = oracle::random_path(d, rng);
        const Conformation conf(std::vector<Site>(p.begin(), p.end()));
        const BitState bits = encode(conf, lat);
        const TermEnergies t = eval_terms(bits, seq, lat, matrix);
        const double chain = chain_energy(conf, lat, seq, matrix);
        const bool ok = t.penalties_zero() && t.contact == chain &&
                        chain == oracle::contact_energy(d, p, letters, table) &&
                        std::abs(model.energy(bits.bits()) - t.total(lambda)) <= kC1Tolerance;
        conformation_failures += !ok;
        ++conformations;
      }
      for (int k = 0; k < kC1BitStates / 3 / kSequencesPerBox; ++k) {
        const double density = std::uniform_real_distribution<double>(0.0, 3.0 / lat.site_count())(rng);
        std::bernoulli_distribution coin(density);
        std::vector<std::uint8_t> raw(model.n_bits);
        for (auto& b : raw) b = coin(rng);
        const BitState bits(lat.site_count(), lat.site_count(), raw);
        const auto o = oracle::terms(d, raw, letters, table);
        const double want = o.emj + lambda.one_site * o.e1 + lambda.self_avoid * o.e2 + lambda.connectivity * o.e3;
        const TermEnergies t = eval_terms(bits, seq, lat, matrix);
        worst = std::max({worst, std::abs(model.energy(raw) - want), std::abs(t.total(lambda) - want)});
        ++bit_states;
      }
    }
  }
  return {conformation_failures == 0 && worst <= kC1Tolerance,
          fmt::format("{} conformations on 2x2x2/3x3x2/3x3x3 ({} mismatches), {} random bit states, "
                      "max |E_model - E_closed_form| = {:.3g} (tol {:g})",
                      conformations, conformation_failures, bit_states, worst, kC1Tolerance)};
}

// ---------------------------------------------------------------------------

std::vector<std::vector<Site>> enumerate_paths(const Lattice& lat, int threads, int seed_len) {
  testing_collect::PathCollector c;
  PathVisitor* v[] = {&c};
  EnumerationOptions o;
  o.threads = threads;
  o.seed_len = seed_len;
  enumerate_all(lat, v, o);
  return std::move(c.paths);
}

Outcome enumeration_exactness() {
  bool pass = true;
  std::string detail;
  const int max_threads = std::max(resolve_threads(0), 4);
  for (oracle::Dims d : {oracle::Dims{2, 2, 2}, oracle::Dims{3, 3, 2}, oracle::Dims{3, 3, 3}}) {
    const Lattice lat(d[0], d[1], d[2]);
    const auto paths = enumerate_paths(lat, 1, 0);
    std::uint64_t directed = 0;
    const auto classes = oracle::structure_classes(d, &directed);
    std::set<oracle::Path> emitted;
    for (const auto& p : paths) emitted.insert({p.begin(), p.end()});
    bool ok = emitted.size() == paths.size() && emitted == classes;
    if (d == oracle::Dims{2, 2, 2}) ok = ok && paths.size() == 3;
    const bool same_threads = enumerate_paths(lat, max_threads, 0) == paths;
    const int long_seed = std::min(8, lat.site_count());
    const bool same_seeds = enumerate_paths(lat, 1, std::min(4, lat.site_count())) == paths &&
                            enumerate_paths(lat, max_threads, long_seed) == paths;
    pass = pass && ok && same_threads && same_seeds;
    detail += fmt::format("{}{}x{}x{}: {} structures, oracle {} ({} directed paths){}{}", detail.empty() ? "" : "; ",
                          d[0], d[1], d[2], paths.size(), classes.size(), directed,
                          same_threads ? "" : ", THREAD MISMATCH", same_seeds ? "" : ", SEED_LEN MISMATCH");
  }
  detail += fmt::format("; identical output for 1 vs {} threads and seed_len 4 vs 8", max_threads);
  return {pass, detail};
}

// ---------------------------------------------------------------------------

Outcome contact_conservation() {
  bool pass = true;
  std::string detail;
  for (oracle::Dims d : {oracle::Dims{2, 2, 2}, oracle::Dims{3, 3, 2}}) {
    const Lattice lat(d[0], d[1], d[2]);
    ContactCountVisitor cc(lat);
    PathVisitor* v[] = {&cc};
    const auto summary = enumerate_all(lat, v, {});
    const int expected = lat.edge_count() - (lat.site_count() - 1);
    const bool ok = summary.complete && cc.histogram().size() == 1 && cc.histogram().begin()->first == expected;
    pass = pass && ok;
    detail += fmt::format("{}x{}x{} complete: {} structures, contacts {{", d[0], d[1], d[2], summary.count);
    for (auto [c, n] : cc.histogram()) detail += fmt::format(" {}:{}", c, n);
    detail += fmt::format(" }} expected {}; ", expected);
  }

  const Lattice lat(4, 4, 3);
  const SymmetryBreaker breaker(lat, BreakingMode::kRules);
  const auto seeds = seed_paths(lat, breaker, kC3SeedLen);
  const int expected = lat.edge_count() - (lat.site_count() - 1);
  std::map<int, std::uint64_t> histogram;
  std::uint64_t invalid = 0;
  std::size_t used = 0;
  // Spread the sampled seeds over the whole seed list.
  for (std::size_t k = 0; k < kC3Seeds && k < seeds.size(); ++k) {
    const auto& seed = seeds[k * seeds.size() / kC3Seeds];
    std::atomic<bool> stop{false};
    std::uint64_t seen = 0;
    extend_all(lat, breaker, seed, [&](std::span<const Site> path) {
      if (!validate_conformation(path, lat).valid()) ++invalid;
      ++histogram[contact_count(path, lat)];
      if (++seen >= kC3PerSeed) stop = true;
    }, &stop);
    ++used;
  }
  std::uint64_t total = 0;
  for (auto [c, n] : histogram) total += n;
  const bool ok443 = invalid == 0 && histogram.size() == 1 && histogram.begin()->first == expected && total > 0;
  pass = pass && ok443;
  detail += fmt::format("4x4x3 partial runs from {} of {} length-{} seeds: {} structures, contacts {{", used,
                        seeds.size(), kC3SeedLen, total);
  for (auto [c, n] : histogram) detail += fmt::format(" {}:{}", c, n);
  detail += fmt::format(" }} expected {}", expected);
  return {pass, detail};
}

// ---------------------------------------------------------------------------

Outcome published_minima(std::int64_t sweeps, bool full) {
  const ContactMatrix matrix = mj_matrix();
  const auto seqs = benchmark();
  const Lattice lat(4, 4, 3);
  const Schedule schedule = make_schedule(25, 1.05, sweeps);
  BatchOptions options;
  options.threads = resolve_threads(0);
  bool pass = true;
  std::string detail = fmt::format("SA {} sweeps/temp, {} runs per sequence;", sweeps, kC4Runs);
  for (int s = 0; s < 6; ++s) {
    const QuboModel model = build_qubo(seqs[s], lat, matrix, {});
    const BatchResult batch = run_batch(model, schedule, kC4Runs, 1, kPublished[s], options);
    double lowest_valid = INFINITY;
    for (const auto& r : batch.runs)
      if (r.final_terms && r.final_terms->penalties_zero()) lowest_valid = std::min(lowest_valid, r.final_terms->contact);
    const double rate = batch.stats.success_rate;
    const double need = full ? (s < 3 ? 0.8 : 1.0) : kC4SmokeRate;
    const bool ok = rate + 1e-12 >= need;
    pass = pass && ok;
    detail += fmt::format(" seq{} target {:.2f} rate {:.2f} (need {:.1f}) lowest valid final {:.2f};", s + 1,
                          kPublished[s], rate, need, lowest_valid);
  }
  detail += " exhaustive 4x4x3 lowest-1 is not desk scale and was not run";
  return {pass, detail};
}

// ---------------------------------------------------------------------------

Outcome kernel_statistics() {
  const QuboModel model = testing_toy::four_bit_model();
  const auto check = testing_toy::boltzmann_check(model, kC5Beta, kC5Sweeps, kC5Batches, 5);
  const bool boltzmann = check.max_abs_z < kC5MaxZ;

  MetropolisKernel frozen(model);
  const auto minimum = testing_toy::strict_local_minimum(model);
  std::uint64_t frozen_accepted = 0;
  if (minimum) {
    frozen.load(*minimum);
    Rng rng(6);
    for (int s = 0; s < kC5FrozenSweeps; ++s) frozen_accepted += frozen.sweep(INFINITY, rng).accepted;
  }

  MetropolisKernel hot(model);
  hot.load(random_state(4, 1));
  Rng rng(7);
  std::uint64_t attempted = 0;
  std::uint64_t accepted = 0;
  for (int s = 0; s < kC5FrozenSweeps; ++s) {
    const auto st = hot.sweep(0.0, rng);
    attempted += st.attempted;
    accepted += st.accepted;
  }
  const bool pass = boltzmann && minimum && frozen_accepted == 0 && accepted == attempted;
  return {pass, fmt::format("4-bit toy at beta {}: {} sweeps, max |z| over 16 states {:.2f} (limit {}); "
                            "beta=inf from a strict local minimum accepted {} of {} proposals; "
                            "beta=0 accepted {} of {}",
                            kC5Beta, kC5Sweeps, check.max_abs_z, kC5MaxZ, frozen_accepted,
                            4 * kC5FrozenSweeps, accepted, attempted)};
}

// ---------------------------------------------------------------------------

Outcome lambda_robustness() {
  const ContactMatrix matrix = mj_matrix();
  const Sequence seq = benchmark()[4];
  const Lattice lat(4, 4, 3);
  const Schedule schedule = make_schedule(25, 1.05, kC6Sweeps);
  BatchOptions options;
  options.threads = resolve_threads(0);

  struct Point {
    std::string label;
    LagrangeParams lambda;
  };
  std::vector<Point> points{{"centre", {1.5, 2.0, 2.0}}};
  for (int axis = 0; axis < 3; ++axis)
    for (double delta : {-kC6Step, kC6Step}) {
      LagrangeParams l{1.5, 2.0, 2.0};
      (axis == 0 ? l.one_site : axis == 1 ? l.self_avoid : l.connectivity) += delta;
      points.push_back({fmt::format("l{}{:+.2f}", axis + 1, delta), l});
    }

  bool pass = true;
  std::string detail = fmt::format("seq5, {} sweeps/temp, {} runs per point, success vs best known {:.2f} "
                                   "[vs published {:.2f}]:",
                                   kC6Sweeps, kC6Runs, kSeq5BestKnown, kPublished[4]);
  for (const auto& p : points) {
    const QuboModel model = build_qubo(seq, lat, matrix, p.lambda);
    const BatchResult batch = run_batch(model, schedule, kC6Runs, 1, kSeq5BestKnown, options);
    const auto published = summarize(batch.runs, kPublished[4]);
    pass = pass && batch.stats.successes > 0;
    detail += fmt::format(" {} {}/{} [{}];", p.label, batch.stats.successes, batch.stats.runs, published.successes);
  }

  const QuboModel open = build_qubo(seq, lat, matrix, {1.5, 0.0, 2.0});
  const BatchResult batch = run_batch(open, schedule, kC6Runs, 1, kSeq5BestKnown, options);
  std::size_t e2_positive = 0;
  for (const auto& r : batch.runs) e2_positive += r.final_terms && r.final_terms->self_avoid > 0;
  pass = pass && e2_positive == batch.runs.size() && !batch.runs.empty();
  detail += fmt::format(" l2=0: {}/{} finals with E2 > 0", e2_positive, batch.runs.size());
  return {pass, detail};
}

// ---------------------------------------------------------------------------

Outcome quantile_correctness() {
  const ContactMatrix matrix = mj_matrix();
  const oracle::Table table = mj_table();
  const auto seqs = benchmark();
  std::mt19937_64 rng(8);
  const oracle::Dims boxes[] = {{2, 2, 2}, {2, 2, 3}, {2, 2, 4}, {3, 3, 2}, {4, 4, 1}, {2, 3, 4}, {3, 3, 3}};
  const double qs[] = {1.5, 2.0, 3.0, 10.0, 100.0, 1e3, 1e4, 1e8};
  int comparisons = 0;
  int mismatches = 0;
  std::string boxes_done;
  for (const auto& d : boxes) {
    const Lattice lat(d[0], d[1], d[2]);
    const int n = lat.site_count();
    const std::string letters[] = {seqs[4].letters().substr(0, n), random_letters(n, rng)};
    for (const auto& l : letters) {
      const Sequence seq(l);
      DosVisitor dos(lat, seq, matrix);
      testing_collect::PathCollector paths;
      PathVisitor* v[] = {&dos, &paths};
      enumerate_all(lat, v, {});
      std::vector<double> energies;
      energies.reserve(paths.paths.size());
      for (const auto& p : paths.paths) energies.push_back(oracle::contact_energy(d, {p.begin(), p.end()}, l, table));
      std::vector<double> q_all(std::begin(qs), std::end(qs));
      q_all.push_back(static_cast<double>(energies.size()));
      const auto got = quantiles(dos.dos(), q_all);
      for (std::size_t k = 0; k < q_all.size(); ++k) {
        ++comparisons;
        // Both sides on the 1e-6 grid the density of states is defined on.
        mismatches += energy_key(got[k]) != energy_key(oracle::sorted_quantile(energies, q_all[k]));
      }
      mismatches += dos.dos().total() != energies.size();
    }
    boxes_done += fmt::format("{}{}x{}x{}", boxes_done.empty() ? "" : ",", d[0], d[1], d[2]);
  }
  return {mismatches == 0, fmt::format("{} quantiles over {} boxes x 2 sequences vs full sort of oracle energies: "
                                       "{} mismatches",
                                       comparisons, boxes_done, mismatches)};
}

// ---------------------------------------------------------------------------

Outcome archive_round_trip() {
  const Lattice lat(3, 3, 2);
  const auto dir = testing_paths::scratch("acceptance_archive");
  testing_collect::PathCollector paths;
  {
    ArchiveWriter writer(dir / "s332.hpth", lat);
    ArchiveVisitor archive(writer, lat.site_count());
    PathVisitor* v[] = {&archive, &paths};
    enumerate_all(lat, v, {});
    writer.commit();
  }
  std::ifstream file(dir / "s332.hpth", std::ios::binary);
  const std::string on_disk((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  const PathArchive a = read_archive(dir / "s332.hpth");
  std::vector<std::vector<Site>> records;
  for (std::size_t k = 0; k < a.header.count; ++k) {
    const auto r = a.record(k);
    records.emplace_back(r.begin(), r.end());
  }
  std::ostringstream rewritten;
  write_archive(rewritten, lat, records);
  const bool identical = rewritten.str() == on_disk && records == paths.paths;

  const Lattice big(4, 4, 3);
  std::vector<Site> snake;
  for (int z = 0; z < 3; ++z)
    for (int yy = 0; yy < 4; ++yy) {
      const int y = z % 2 ? 3 - yy : yy;
      for (int xx = 0; xx < 4; ++xx) snake.push_back(big.site({(yy + 4 * z) % 2 ? 3 - xx : xx, y, z}));
    }
  std::ostringstream one;
  const std::vector<std::vector<Site>> single{snake};
  write_archive(one, big, single);
  std::istringstream back(one.str());
  const PathArchive b = read_archive(back);
  const bool width = a.header.record_width == 18 && b.header.record_width == 48 &&
                     one.str().size() == kArchiveHeaderSize + 48;
  return {identical && width,
          fmt::format("3x3x2: {} records, {} bytes, rewrite byte-identical {}; record width {} (3x3x2), {} (4x4x3)",
                      a.header.count, on_disk.size(), identical ? "yes" : "no", a.header.record_width,
                      b.header.record_width)};
}

// ---------------------------------------------------------------------------

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance gates"};
  std::vector<int> selected;
  bool full_gate = false;
  app.add_option("-c,--criterion", selected, "criteria to run (default: all)")->check(CLI::Range(1, 8));
  app.add_flag("--full-gate", full_gate, "criterion 4 at 80,000 sweeps per temperature");
  CLI11_PARSE(app, argc, argv);

  const Criterion criteria[] = {
      {1, "encoding oracle equivalence", encoding_equivalence},
      {2, "enumeration exactness", enumeration_exactness},
      {3, "contact-count conservation", contact_conservation},
      {4, full_gate ? "published minima, full SA gate" : "published minima, SA smoke gate",
       [&] { return published_minima(full_gate ? kC4FullSweeps : kC4SmokeSweeps, full_gate); }},
      {5, "SA kernel statistics", kernel_statistics},
      {6, "lambda robustness", lambda_robustness},
      {7, "quantile correctness", quantile_correctness},
      {8, "archive round trip", archive_round_trip},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    failures += !o.pass;
    std::cout << fmt::format("criterion {} {} {}: {} [{:.1f} s]", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail,
                             seconds_since(t0))
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
