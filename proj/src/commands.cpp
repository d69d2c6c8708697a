#include "compactfold/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "compactfold/annealer.hpp"
#include "compactfold/archive.hpp"
#include "compactfold/enumeration.hpp"
#include "compactfold/error.hpp"
#include "compactfold/io.hpp"

namespace compactfold {

namespace fs = std::filesystem;

namespace {

Lattice make_lattice(const ExperimentConfig& c) { return Lattice(c.dims[0], c.dims[1], c.dims[2]); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  boost::algorithm::split(cells, line, boost::algorithm::is_any_of(","));
  for (auto& c : cells) boost::algorithm::trim(c);
  return cells;
}

// Yields data rows after checking the header; skips blank lines.
std::vector<std::vector<std::string>> read_csv(std::istream& in, const std::string& header) {
  std::string line;
  if (!std::getline(in, line) || boost::algorithm::trim_copy(line) != header)
    throw DataError(fmt::format("expected CSV header '{}'", header));
  const std::size_t width = split_csv(header).size();
  std::vector<std::vector<std::string>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (boost::algorithm::trim_copy(line).empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != width)
      throw DataError(fmt::format("CSV line {}: expected {} fields, got {}", lineno, width, cells.size()));
    rows.push_back(std::move(cells));
  }
  return rows;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(v)) throw DataError(fmt::format("bad number '{}'", s));
  return v;
}

std::uint64_t to_count(const std::string& s) {
  char* end = nullptr;
  const auto v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0' || s.front() == '-') throw DataError(fmt::format("bad count '{}'", s));
  return v;
}

std::string fixed(double v) { return fmt::format("{:.6f}", v); }

struct RunRow {
  std::size_t index;
  const RunResult* run;
  bool valid;
  bool success;
  std::string path_hex;
};

RunRow describe_run(const RunResult& run, std::uint64_t base_seed, const QuboModel& model,
                    const Lattice& lattice, std::optional<double> reference) {
  const int residues = static_cast<int>(model.n_bits / lattice.site_count());
  const auto decoded = decode(BitState(residues, lattice.site_count(), run.final_bits), lattice);
  RunRow row{static_cast<std::size_t>(run.seed - base_seed), &run, decoded.ok(),
             is_success(run, reference), ""};
  if (decoded.ok()) row.path_hex = path_to_hex(decoded.conformation->path());
  return row;
}

nlohmann::ordered_json terms_json(const TermEnergies& t) {
  nlohmann::ordered_json j;
  j["contact"] = t.contact;
  j["one_site"] = t.one_site;
  j["self_avoid"] = t.self_avoid;
  j["connectivity"] = t.connectivity;
  return j;
}

nlohmann::ordered_json run_json(const RunRow& row, std::int64_t sweeps) {
  const RunResult& r = *row.run;
  nlohmann::ordered_json j;
  j["run"] = row.index;
  j["seed"] = r.seed;
  j["sweeps_per_temp"] = sweeps;
  j["final_energy"] = r.final_energy;
  if (r.final_terms) j["final_terms"] = terms_json(*r.final_terms);
  j["best_energy"] = r.best_energy;
  j["valid"] = row.valid;
  j["success"] = row.success;
  if (row.valid) j["path_hex"] = row.path_hex;
  auto& trace = j["trace"] = nlohmann::ordered_json::array();
  for (const auto& t : r.trace) {
    nlohmann::ordered_json e;
    e["beta"] = t.beta;
    e["energy"] = t.energy;
    if (t.terms) e["terms"] = terms_json(*t.terms);
    e["acceptance_rate"] = t.acceptance_rate;
    trace.push_back(std::move(e));
  }
  return j;
}

std::string reference_text(std::optional<double> reference) {
  return reference ? fixed(*reference) : std::string();
}

}  // namespace

std::string format_energy(double energy) {
  const std::int64_t key = energy_key(energy);
  const std::uint64_t mag = key < 0 ? static_cast<std::uint64_t>(-key) : static_cast<std::uint64_t>(key);
  return fmt::format("{}{}.{:06d}", key < 0 ? "-" : "", mag / 1000000, mag % 1000000);
}

DensityOfStates read_dos_csv(std::istream& in) {
  DensityOfStates dos;
  for (const auto& row : read_csv(in, "energy,count")) dos.add(to_double(row[0]), to_count(row[1]));
  return dos;
}

std::vector<RankedPath> read_lowest_k_csv(std::istream& in) {
  std::vector<RankedPath> out;
  for (const auto& row : read_csv(in, "rank,energy,Q,path_hex"))
    out.push_back({to_double(row[1]), path_from_hex(row[3])});
  return out;
}

int cmd_build_qubo(const ExperimentConfig& config, CommandContext& ctx) {
  validate(config);
  const Lattice lattice = make_lattice(config);
  const Sequence seq = load_sequence(config);
  const ContactMatrix matrix = load_matrix(config);
  const QuboModel model = build_qubo(seq, lattice, matrix, config.lambda);
  const fs::path path = config.out_dir / "qubo.txt";
  write_atomically(path, [&](std::ostream& out) { export_qubo(model, out); });
  fmt::print(ctx.out, "n_bits {}\nlinear_nonzero {}\nquadratic_nonzero {}\nwrote {}\n", model.n_bits,
             model.nonzero_linear(), model.quadratic.size(), path.string());
  return 0;
}

int cmd_anneal(const ExperimentConfig& config, CommandContext& ctx) {
  validate(config);
  const Lattice lattice = make_lattice(config);
  const Sequence seq = load_sequence(config);
  const ContactMatrix matrix = load_matrix(config);
  const auto reference = reference_energy(config, seq);
  std::optional<DensityOfStates> dos;
  if (!config.dos.empty()) {
    auto in = open_input(config.dos);
    dos = read_dos_csv(in);
  }
  const QuboModel model = build_qubo(seq, lattice, matrix, config.lambda);
  const int threads = resolve_threads(config.threads);

  std::string summary = "sweeps,runs,successes,success_rate,mean_final_energy,reference\n";
  std::string log;
  bool interrupted = false;

  for (const std::int64_t sweeps : config.sweeps) {
    const Schedule schedule = make_schedule(config.n_temps, config.ratio, sweeps);
    BatchOptions options;
    options.threads = threads;
    options.stop = ctx.stop;
    const BatchResult batch = run_batch(model, schedule, static_cast<std::size_t>(config.runs),
                                        config.base_seed, reference, options);

    std::vector<RunRow> rows;
    for (const auto& run : batch.runs) rows.push_back(describe_run(run, config.base_seed, model, lattice, reference));

    const fs::path batch_csv = config.out_dir / fmt::format("batch_s{}.csv", sweeps);
    write_atomically(batch_csv, [&](std::ostream& out) {
      out << "run,seed,final_energy,e_mj,e1,e2,e3,valid,success\n";
      for (const auto& row : rows) {
        const auto& t = *row.run->final_terms;
        fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", row.index, row.run->seed,
                   fixed(row.run->final_energy), fixed(t.contact), t.one_site, t.self_avoid,
                   t.connectivity, row.valid ? 1 : 0, row.success ? 1 : 0);
      }
    });
    const fs::path run_dir = config.out_dir / fmt::format("runs_s{}", sweeps);
    for (const auto& row : rows) {
      write_atomically(run_dir / fmt::format("run_{}.json", row.index),
                       [&](std::ostream& out) { out << run_json(row, sweeps).dump(2) << '\n'; });
      log += fmt::format("sweeps {} run {} seed {} seconds {:.3f}\n", sweeps, row.index, row.run->seed,
                         row.run->wall_seconds);
    }

    const BatchStats& s = batch.stats;
    summary += fmt::format("{},{},{},{},{},{}\n", sweeps, s.runs, s.successes,
                           reference ? fixed(s.success_rate) : std::string(), fixed(s.mean_final_energy),
                           reference_text(reference));
    fmt::print(ctx.out, "sweeps {}: runs {} successes {} mean_final_energy {}\n", sweeps, s.runs,
               s.successes, fixed(s.mean_final_energy));
    if (batch.interrupted) {
      interrupted = true;
      break;
    }
  }

  write_atomically(config.out_dir / "summary.csv", [&](std::ostream& out) { out << summary; });
  write_atomically(config.out_dir / "anneal.log", [&](std::ostream& out) { out << log; });
  if (dos) {
    const std::vector<double> qs = {2.0, 100.0, 1e8};
    const auto values = quantiles(*dos, qs);
    write_atomically(config.out_dir / "reference_lines.csv", [&](std::ostream& out) {
      out << "label,q,energy\n";
      out << "min,," << format_energy(dos->bins().front().energy) << '\n';
      out << "q2,2," << format_energy(values[0]) << '\n';
      out << "q100,100," << format_energy(values[1]) << '\n';
      out << "q1e8,100000000," << format_energy(values[2]) << '\n';
    });
  }
  if (interrupted) {
    fmt::print(ctx.err, "interrupted; completed runs were written to {}\n", config.out_dir.string());
    return 1;
  }
  return 0;
}

int cmd_enumerate(const ExperimentConfig& config, CommandContext& ctx) {
  validate(config);
  const Lattice lattice = make_lattice(config);
  const bool scored = !config.sequences.empty() || !config.matrix.empty();

  std::optional<Sequence> seq;
  std::optional<ContactMatrix> matrix;
  if (scored) {
    seq = load_sequence(config);
    matrix = load_matrix(config);
    if (seq->length() != lattice.site_count()) {
      throw UsageError(fmt::format("sequence has {} residues but the box has {} sites", seq->length(),
                                   lattice.site_count()));
    }
  }

  ContactCountVisitor contacts(lattice);
  std::vector<PathVisitor*> visitors = {&contacts};
  std::optional<DosVisitor> dos;
  std::optional<LowestKVisitor> lowest;
  if (scored) {
    dos.emplace(lattice, *seq, *matrix);
    lowest.emplace(lattice, *seq, *matrix, config.lowest_k);
    visitors.push_back(&*dos);
    visitors.push_back(&*lowest);
  }
  std::unique_ptr<ArchiveWriter> writer;
  std::optional<ArchiveVisitor> archive;
  if (config.archive) {
    writer = std::make_unique<ArchiveWriter>(config.out_dir / "structures.hpth", lattice);
    archive.emplace(*writer, lattice.site_count());
    visitors.push_back(&*archive);
  }

  EnumerationOptions options;
  options.seed_len = config.seed_len;
  options.threads = config.threads;
  options.mode = parse_breaking_mode(config.symmetry);
  options.checkpoint = config.out_dir / "enumerate.ckpt";
  options.checkpoint_interval = config.checkpoint_interval;
  options.resume = config.resume;
  options.max_seeds = config.max_seeds;
  options.stop = ctx.stop;
  fs::create_directories(config.out_dir);
  const EnumerationSummary summary = enumerate_all(lattice, visitors, options);

  write_atomically(config.out_dir / "enumerate.log", [&](std::ostream& out) {
    fmt::print(out, "threads {}\nseeds_done {}\nwall_seconds {:.3f}\n", summary.threads,
               summary.seeds_done, summary.wall_seconds);
  });
  if (!summary.complete) {
    fmt::print(ctx.err, "stopped after {} of {} seeds; checkpoint in {}; rerun with --resume\n",
               summary.seeds_done, summary.seeds_total, options.checkpoint.string());
    return 1;
  }

  write_atomically(config.out_dir / "enumeration.txt", [&](std::ostream& out) {
    fmt::print(out, "dims {}x{}x{}\nsites {}\nsymmetry {}\nseed_len {}\nseeds {}\nstructures {}\n",
               lattice.lx(), lattice.ly(), lattice.lz(), lattice.site_count(), to_string(summary.mode),
               summary.seed_len, summary.seeds_total, summary.count);
  });
  write_atomically(config.out_dir / "contacts.csv", [&](std::ostream& out) {
    out << "contacts,count\n";
    for (const auto& [c, n] : contacts.histogram()) fmt::print(out, "{},{}\n", c, n);
  });
  if (scored) {
    write_atomically(config.out_dir / "dos.csv", [&](std::ostream& out) {
      out << "energy,count\n";
      for (const auto& bin : dos->dos().bins()) fmt::print(out, "{},{}\n", format_energy(bin.energy), bin.count);
    });
    const auto ranked = lowest->lowest().sorted();
    const auto points = landscape(ranked, lattice);
    write_atomically(config.out_dir / "lowest_k.csv", [&](std::ostream& out) {
      out << "rank,energy,Q,path_hex\n";
      for (std::size_t r = 0; r < ranked.size(); ++r) {
        fmt::print(out, "{},{},{},{}\n", r + 1, format_energy(ranked[r].energy), fixed(points[r].q),
                   path_to_hex(ranked[r].path));
      }
    });
    if (!ranked.empty()) fmt::print(ctx.out, "lowest energy {}\n", format_energy(ranked.front().energy));
  }
  if (writer) writer->commit();
  fmt::print(ctx.out, "structures {}\n", summary.count);
  return 0;
}

int cmd_landscape(const ExperimentConfig& config, CommandContext& ctx) {
  validate(config);
  if (config.lowest_k_file.empty())
    throw UsageError("landscape needs a lowest-K input (landscape.lowest_k / --lowest-k)");
  const Lattice lattice = make_lattice(config);
  auto in = open_input(config.lowest_k_file);
  const auto ranked = read_lowest_k_csv(in);
  if (ranked.empty()) throw DataError(fmt::format("{} lists no structures", config.lowest_k_file.string()));
  if (!std::is_sorted(ranked.begin(), ranked.end()))
    throw DataError(fmt::format("{} is not sorted by energy", config.lowest_k_file.string()));
  const auto points = landscape(ranked, lattice);
  write_atomically(config.out_dir / "landscape.csv", [&](std::ostream& out) {
    out << "rank,Q,dE\n";
    for (const auto& p : points) fmt::print(out, "{},{},{}\n", p.rank, fixed(p.q), format_energy(p.delta));
  });
  fmt::print(ctx.out, "{} points\n", points.size());
  return 0;
}

int cmd_lambda_sweep(const ExperimentConfig& config, CommandContext& ctx) {
  validate(config);
  if (config.sweeps.size() != 1) throw UsageError("lambda-sweep takes a single anneal.sweeps value");
  const Lattice lattice = make_lattice(config);
  const Sequence seq = load_sequence(config);
  const ContactMatrix matrix = load_matrix(config);
  const auto reference = reference_energy(config, seq);
  const Schedule schedule = make_schedule(config.n_temps, config.ratio, config.sweeps.front());
  BatchOptions options;
  options.threads = resolve_threads(config.threads);
  options.stop = ctx.stop;

  std::string csv =
      "axis,delta,lambda1,lambda2,lambda3,runs,successes,success_rate,mean_final_energy,frac_e2_positive\n";
  bool interrupted = false;
  for (int axis = 0; axis < 3 && !interrupted; ++axis) {
    for (int k = -config.lambda_steps; k <= config.lambda_steps; ++k) {
      const double delta = k * config.lambda_step;
      LagrangeParams lambda = config.lambda;
      double& component = axis == 0 ? lambda.one_site : axis == 1 ? lambda.self_avoid : lambda.connectivity;
      component += delta;
      if (component < -1e-12) continue;
      if (std::abs(component) < 1e-12) component = 0.0;
      const QuboModel model = build_qubo(seq, lattice, matrix, lambda);
      const BatchResult batch = run_batch(model, schedule, static_cast<std::size_t>(config.runs),
                                          config.base_seed, reference, options);
      std::size_t e2_positive = 0;
      for (const auto& run : batch.runs)
        if (run.final_terms && run.final_terms->self_avoid > 0) ++e2_positive;
      const auto& s = batch.stats;
      const double frac = s.runs ? static_cast<double>(e2_positive) / static_cast<double>(s.runs) : 0.0;
      csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", axis + 1, delta, lambda.one_site,
                         lambda.self_avoid, lambda.connectivity, s.runs, s.successes,
                         reference ? fixed(s.success_rate) : std::string(), fixed(s.mean_final_energy),
                         fixed(frac));
      fmt::print(ctx.out, "axis {} delta {}: successes {}/{}\n", axis + 1, delta, s.successes, s.runs);
      if (batch.interrupted) {
        interrupted = true;
        break;
      }
    }
  }
  write_atomically(config.out_dir / "lambda_sweep.csv", [&](std::ostream& out) { out << csv; });
  if (interrupted) {
    fmt::print(ctx.err, "interrupted; completed points were written to {}\n", config.out_dir.string());
    return 1;
  }
  return 0;
}

}  // namespace compactfold
