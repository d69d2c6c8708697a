#include "compactfold/cli.hpp"

#include <functional>
#include <ostream>
#include <utility>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "compactfold/commands.hpp"
#include "compactfold/error.hpp"

namespace compactfold {

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

// Flags shared by every command.
constexpr Flag kCommon[] = {
    {"--dims", "lattice.dims", "box dimensions, e.g. 4,4,3"},
    {"--sequences", "data.sequences", "FASTA file of sequences"},
    {"--sequence", "data.sequence", "1-based index or name of the sequence"},
    {"--matrix", "data.matrix", "contact-energy matrix file"},
    {"--emin", "data.emin", "reference minimum energy for success"},
    {"--out", "output.dir", "output directory"},
    {"--threads", "run.threads", "worker threads (default: COMPACTFOLD_THREADS or all cores)"},
};

constexpr Flag kQubo[] = {
    {"--lambda", "qubo.lambda", "penalty weights l1,l2,l3"},
};

constexpr Flag kAnneal[] = {
    {"--n-temps", "anneal.n_temps", "number of temperatures"},
    {"--ratio", "anneal.ratio", "geometric ratio of successive betas"},
    {"--sweeps", "anneal.sweeps", "sweeps per temperature (comma list for a grid)"},
    {"--runs", "anneal.runs", "independent runs per grid point"},
    {"--seed", "anneal.seed", "base seed; run i uses seed + i"},
};

constexpr Flag kEnumerate[] = {
    {"--seed-len", "enumerate.seed_len", "seed path length (0 = automatic)"},
    {"--lowest-k", "enumerate.lowest_k", "number of lowest structures kept"},
    {"--symmetry", "enumerate.symmetry", "auto, rules or canonical"},
    {"--checkpoint-interval", "enumerate.checkpoint_interval", "seconds between checkpoints"},
    {"--max-seeds", "enumerate.max_seeds", "stop after this many seeds"},
};

void add_flags(CLI::App* app, std::span<const Flag> flags, Overrides& overrides) {
  for (const Flag& f : flags) {
    const std::string key = f.key;
    app->add_option_function<std::string>(
        f.name, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, f.help);
  }
}

void add_switch(CLI::App* app, const char* name, const char* key, const char* help, Overrides& overrides) {
  const std::string k = key;
  app->add_flag_function(name, [&overrides, k](std::int64_t) { overrides.emplace_back(k, "true"); }, help);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* stop) {
  CLI::App app{"Compact lattice protein folding: QUBO annealing and exact enumeration", "compactfold"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::vector<std::string> settings;

  using Command = std::function<int(const ExperimentConfig&, CommandContext&)>;
  std::vector<std::pair<CLI::App*, Command>> commands;

  auto add_command = [&](const char* name, const char* help, Command run) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "INI configuration file");
    sub->add_option("--set", settings, "override any key: section.key=value");
    add_flags(sub, kCommon, overrides);
    commands.emplace_back(sub, std::move(run));
    return sub;
  };

  auto* build = add_command("build-qubo", "export the QUBO model of one sequence", cmd_build_qubo);
  add_flags(build, kQubo, overrides);

  auto* anneal = add_command("anneal", "simulated-annealing batches over a sweeps grid", cmd_anneal);
  add_flags(anneal, kQubo, overrides);
  add_flags(anneal, kAnneal, overrides);
  anneal->add_option_function<std::string>(
      "--dos", [&](const std::string& v) { overrides.emplace_back("anneal.dos", v); },
      "density-of-states CSV for reference lines");

  auto* enumerate = add_command("enumerate", "exact enumeration of compact structures", cmd_enumerate);
  add_flags(enumerate, kEnumerate, overrides);
  add_switch(enumerate, "--archive", "enumerate.archive", "write structures.hpth", overrides);
  add_switch(enumerate, "--resume", "enumerate.resume", "continue from the checkpoint", overrides);

  auto* land = add_command("landscape", "(Q, dE) pairs from a lowest-K list", cmd_landscape);
  land->add_option_function<std::string>(
      "--lowest-k", [&](const std::string& v) { overrides.emplace_back("landscape.lowest_k", v); },
      "lowest_k.csv written by enumerate");

  auto* sweep = add_command("lambda-sweep", "success rate against one-at-a-time lambda shifts",
                            cmd_lambda_sweep);
  add_flags(sweep, kQubo, overrides);
  add_flags(sweep, kAnneal, overrides);
  sweep->add_option_function<std::string>(
      "--step", [&](const std::string& v) { overrides.emplace_back("lambda_sweep.step", v); },
      "lambda increment");
  sweep->add_option_function<std::string>(
      "--steps", [&](const std::string& v) { overrides.emplace_back("lambda_sweep.steps", v); },
      "increments on each side of the centre");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    for (const auto& s : settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError(fmt::format("--set expects key=value, got '{}'", s));
      apply_setting(config, s.substr(0, eq), s.substr(eq + 1), {});
    }
    for (const auto& [key, value] : overrides) apply_setting(config, key, value, {});

    CommandContext ctx{out, err, stop};
    for (auto& [sub, run] : commands)
      if (sub->parsed()) return run(config, ctx);
    return kExitUsage;
  } catch (const UsageError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitFailure;
  }
}

}  // namespace compactfold
