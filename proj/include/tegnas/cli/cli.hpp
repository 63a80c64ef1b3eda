#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "tegnas/cli/config.hpp"

namespace tegnas::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kParse = 2, kConfig = 3, kRuntime = 4, kMissing = 5 };

inline int exit_code(Errc e) {
  switch (e) {
    case Errc::ParseError:
    case Errc::UnknownOp:
    case Errc::InvalidArch:
      return kParse;
    case Errc::ConfigError:
      return kConfig;
    case Errc::IoError:
    case Errc::NoCheckpoint:
      return kMissing;
    default:
      return kRuntime;
  }
}

/// Flag values; unset flags leave the config file (or defaults) alone.
struct Flags {
  std::optional<std::string> config, out, space, method, table, parent, bench, scores, arch;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads, repeats, cap, max_evaluations, spawn_step, grid, interp, epochs;
  std::optional<std::vector<std::uint64_t>> child_seeds;
  bool all = false;
};

inline RunConfig load_config(const Flags& f) {
  RunConfig c;
  if (f.config) c = RunConfig::from_json(parse_json(read_file(*f.config), *f.config));
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.out = *f.out;
  if (f.space) c.space = *f.space;
  if (f.repeats) c.indicators.repeats = *f.repeats;
  if (f.method) c.search.method = search::method_from_name(*f.method);
  if (f.cap) c.search.cap = *f.cap;
  if (f.max_evaluations) c.search.max_evaluations = *f.max_evaluations;
  if (f.table) c.table = *f.table;
  if (f.spawn_step) c.landscape.spawn_step = *f.spawn_step;
  if (f.grid) c.landscape.grid = *f.grid;
  if (f.interp) c.landscape.interp = *f.interp;
  if (f.epochs) c.train.epochs = *f.epochs;
  if (f.child_seeds) {
    if (f.child_seeds->size() != 2) throw Error(Errc::ConfigError, "--child-seeds takes exactly two values");
    c.landscape.child_seeds = {(*f.child_seeds)[0], (*f.child_seeds)[1]};
  }
  c.validate();
  c.propagate_seed();
  return c;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream o(p, std::ios::binary);
  o << text;
  if (!o) throw Error(Errc::IoError, "cannot write '" + p.string() + "'");
}

inline std::filesystem::path out_dir(const RunConfig& c) {
  if (!c.out) throw Error(Errc::ConfigError, "this command needs --out (or \"out\" in the config)");
  std::filesystem::create_directories(*c.out);
  return *c.out;
}

inline std::shared_ptr<const data::DataSource> make_source(const RunConfig& c) {
  return std::make_shared<const data::DataSource>(data::make_toy_dataset(c.dataset));
}

inline search::Evaluator make_evaluator(const RunConfig& c, const netgen::SearchSpace& space,
                                        std::optional<std::size_t> threads) {
  if (c.table) return search::TableEvaluator(space, load_reports(*c.table));
  auto ind = c.indicators;
  ind.threads = threads;
  return search::TegEvaluator(space, make_source(c), ind);
}

inline std::vector<netgen::Architecture> enumerable(const netgen::SearchSpace& space) {
  if (!space.is_cell()) throw Error(Errc::ConfigError, "space " + space.id() + " cannot be enumerated");
  return netgen::enumerate(space);
}

inline std::string jsonl(const std::map<std::string, indicators::IndicatorReport>& reps) {
  std::string s;
  for (const auto& [arch, r] : reps) s += r.to_json().dump() + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Commands.

inline int cmd_score(const Flags& f, std::ostream& out) {
  const auto c = load_config(f);
  const auto space = c.make_space();
  if (f.all) {
    const auto reps = search::score_all(enumerable(space), space, *make_source(c), c.indicators, f.threads);
    const auto text = jsonl(reps);
    if (c.out) {
      const auto dir = out_dir(c);
      write_file(dir / "config.json", c.to_json().dump(2) + "\n");
      write_file(dir / "scores.jsonl", text);
    }
    out << text;
    return kOk;
  }
  if (!f.arch) throw Error(Errc::ConfigError, "score needs an architecture string or --all");
  const auto arch = netgen::arch_from_string(*f.arch, space);
  auto ind = c.indicators;
  ind.threads = f.threads;
  out << indicators::evaluate(arch, space, *make_source(c), ind).to_json().dump(2) << "\n";
  return kOk;
}

inline int cmd_search(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const auto c = load_config(f);
  const auto dir = out_dir(c);
  const auto space = c.make_space();
  write_file(dir / "config.json", c.to_json().dump(2) + "\n");
  search::SearchRun run(space, make_evaluator(c, space, f.threads), c.search);
  try {
    while (!run.done()) run.step();
  } catch (const Error& e) {
    write_file(dir / "runlog.jsonl", search::to_jsonl(run.log()));
    err << "error: " << e.what() << " (partial log kept, " << run.log().size() << " evaluations)\n";
    return kRuntime;
  }
  write_file(dir / "runlog.jsonl", search::to_jsonl(run.log()));
  auto result = run.result_json();
  result["tool_version"] = kVersion;
  write_file(dir / "result.json", result.dump(2) + "\n");
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(dir / "timing.json", json{{"wall_seconds", wall}}.dump(2) + "\n");
  out << "best_arch " << result["best_arch"].get<std::string>() << "\n"
      << "evaluations " << run.evaluations() << "\n"
      << "stop_reason " << run.stop_reason() << "\n";
  return kOk;
}

/// Rebuilds the parent run from its config snapshot (replay is bit-exact) and
/// branches it at the spawn step.
inline int cmd_landscape(const Flags& f, std::ostream& out) {
  const auto c = load_config(f);
  if (!f.parent) throw Error(Errc::ConfigError, "landscape needs --parent <search output dir>");
  const std::filesystem::path pdir = *f.parent;
  auto parent_cfg = RunConfig::from_json(parse_json(read_file((pdir / "config.json").string()), "parent config"));
  parent_cfg.validate();
  parent_cfg.propagate_seed();
  const auto result = parse_json(read_file((pdir / "result.json").string()), "parent result");
  const auto steps = result.at("steps").get<std::size_t>();
  if (c.landscape.spawn_step > steps)
    throw Error(Errc::NoCheckpoint, "spawn step " + std::to_string(c.landscape.spawn_step) + " is beyond the parent's " +
                                        std::to_string(steps) + " recorded steps");
  const auto dir = out_dir(c);
  const auto space = parent_cfg.make_space();
  const auto eval = make_evaluator(parent_cfg, space, f.threads);
  const search::SearchRun parent(space, eval, parent_cfg.search);
  const auto res = landscape::build_landscape(parent, c.landscape, eval, f.threads);
  write_file(dir / "config.json", c.to_json().dump(2) + "\n");
  write_file(dir / "landscape.csv", landscape::to_csv(res.rows));
  write_file(dir / "variance.json", res.variance_json().dump(2) + "\n");
  out << "rows " << res.rows.size() << "\n";
  return kOk;
}

inline int cmd_analyze(const Flags& f, std::ostream& out) {
  const auto c = load_config(f);
  if (!f.bench) throw Error(Errc::ConfigError, "analyze needs --bench <csv>");
  const auto space = c.make_space();
  const auto bench = bench::load_tabular(*f.bench, space);
  std::map<std::string, indicators::IndicatorReport> table;
  if (f.scores) {
    table = load_reports(*f.scores);
  } else {
    std::vector<netgen::Architecture> archs;
    for (const auto& [arch, row] : bench.rows) archs.push_back(netgen::arch_from_string(arch, space));
    table = search::score_all(archs, space, *make_source(c), c.indicators, f.threads);
  }
  std::vector<indicators::IndicatorReport> reps;
  for (const auto& [arch, row] : bench.rows) {
    const auto it = table.find(arch);
    if (it == table.end()) throw Error(Errc::UnknownArch, "no scores for " + arch);
    reps.push_back(it->second);
  }
  const auto corr = bench::correlation_report(bench, reps);
  json j;
  if (reps.size() >= 10) {
    const auto subsets = bench::exclusive_subsets(reps);
    auto parse = [&](const std::vector<std::string>& v) {
      std::vector<netgen::Architecture> a;
      for (const auto& s : v) a.push_back(netgen::arch_from_string(s, space));
      return a;
    };
    j = bench::analysis_json(corr, subsets, parse(subsets.a_kappa), parse(subsets.a_regions), parse(subsets.a_mse), space);
  } else {
    j = bench::analysis_json(corr, {}, {}, {}, {}, space);
    j["subsets"] = nullptr;
    j["preference"] = nullptr;
  }
  const auto text = j.dump(2) + "\n";
  if (c.out) {
    const auto dir = out_dir(c);
    write_file(dir / "config.json", c.to_json().dump(2) + "\n");
    write_file(dir / "analysis.json", text);
  }
  out << text;
  return kOk;
}

inline int cmd_bench_train(const Flags& f, std::ostream& out) {
  const auto c = load_config(f);
  const auto space = c.make_space();
  const auto ds = data::make_toy_dataset(c.dataset);
  const auto text = bench::serialize_tabular(bench::train_all(enumerable(space), space, ds, c.train, c.train_seeds, f.threads));
  if (c.out) {
    const auto dir = out_dir(c);
    write_file(dir / "config.json", c.to_json().dump(2) + "\n");
    write_file(dir / "bench.csv", text);
  }
  out << text;
  return kOk;
}

// ---------------------------------------------------------------------------

/// Entry point. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Training-free architecture scoring and search"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "JSON config file");
  app.add_option("--seed", f.seed, "Run seed");
  app.add_option("--threads", f.threads, "Worker threads (default: TEGNAS_THREADS, else all cores)")->check(CLI::PositiveNumber);
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--space", f.space, "toy | cell201 | graph101");

  auto* score = app.add_subcommand("score", "Score one architecture, or every architecture with --all");
  score->add_option("arch", f.arch, "Architecture string");
  score->add_flag("--all", f.all, "Score the whole space as JSONL");
  score->add_option("--repeats", f.repeats, "Indicator repeats");

  auto* srch = app.add_subcommand("search", "Run a search and write its artifacts");
  srch->add_option("--method", f.method, "rl | evolution | fpnas");
  srch->add_option("--cap", f.cap, "Hard cap on steps");
  srch->add_option("--max-evaluations", f.max_evaluations, "Evaluation budget");
  srch->add_option("--table", f.table, "Score from a JSONL table instead of live evaluation");
  srch->add_option("--repeats", f.repeats, "Indicator repeats");

  auto* land = app.add_subcommand("landscape", "Branch a recorded search and map its landscape");
  land->add_option("--parent", f.parent, "Output directory of the parent search")->required();
  land->add_option("--spawn-step", f.spawn_step, "Step to branch at");
  land->add_option("--child-seeds", f.child_seeds, "Two child seeds")->expected(2);
  land->add_option("--grid", f.grid, "Grid architectures");
  land->add_option("--interp", f.interp, "Interpolation points");

  auto* an = app.add_subcommand("analyze", "Correlate indicators with a tabular benchmark");
  an->add_option("--bench", f.bench, "arch,train_acc,test_acc CSV")->required();
  an->add_option("--scores", f.scores, "JSONL reports (scored live when omitted)");
  an->add_option("--repeats", f.repeats, "Indicator repeats");

  auto* bt = app.add_subcommand("bench-train", "Train every architecture of a small space");
  bt->add_option("--epochs", f.epochs, "Training epochs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kParse;
  }

  try {
    if (score->parsed()) return cmd_score(f, out);
    if (srch->parsed()) return cmd_search(f, out, err);
    if (land->parsed()) return cmd_landscape(f, out);
    if (an->parsed()) return cmd_analyze(f, out);
    return cmd_bench_train(f, out);
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (e.position() && std::string_view(e.what()).find("offset") == std::string_view::npos)
      err << " (at offset " << *e.position() << ")";
    err << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
}

}  // namespace tegnas::cli
