// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <utility>

#include "tegnas/bench.hpp"
#include "tegnas/landscape.hpp"
#include "tegnas/search.hpp"

namespace fs = std::filesystem;
using namespace tegnas;
using netgen::Architecture;
using netgen::SearchSpace;
using numkit::Matrix;
using numkit::Rng;
using indicators::IndicatorReport;

namespace {

struct Outcome {
  Outcome() = default;
  Outcome(bool p, std::string d, std::vector<std::string> n = {}) : pass(p), detail(std::move(d)), notes(std::move(n)) {}
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

const data::DataSource& toy_source() {
  static const data::DataSource src(data::make_toy_dataset());
  return src;
}

// Exhaustive indicator table over the 27-arch space, default settings.
const std::map<std::string, IndicatorReport>& toy_table() {
  static const auto table = [] {
    const auto s = SearchSpace::toy_enum();
    return search::score_all(netgen::enumerate(s), s, toy_source(), {});
  }();
  return table;
}

std::vector<IndicatorReport> table_reports() {
  std::vector<IndicatorReport> v;
  for (const auto& [k, r] : toy_table()) v.push_back(r);
  return v;
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream o;
  o.precision(prec);
  o << v;
  return o.str();
}

// ------------------------------------------------------------------------ 1

double summed_logits(const netgen::CompiledNet& net, const netgen::ImageBatch& x, std::size_t i) {
  netgen::ImageBatch one(1, x.channels, x.height, x.width);
  std::copy(x.sample(i).begin(), x.sample(i).end(), one.data.begin());
  const auto r = netgen::forward(net, one);
  double s = 0.0;
  for (double v : r.logits.row(0)) s += v;
  return s;
}

Outcome jacobian_check() {
  const auto s = SearchSpace::cell201();
  Rng rng(2024);
  const double h = 1e-5;
  double worst = 0.0;
  std::size_t nets = 0, coords = 0;
  while (nets < 5) {
    auto net = netgen::compile(netgen::random_arch(s, rng), s, rng);
    netgen::ImageBatch x(2, s.macro.in_channels, s.macro.input_size, s.macro.input_size);
    for (auto& v : x.data) v = rng.normal();
    const auto j = netgen::jacobian(net, x);
    const std::vector<double> base(net.parameters().begin(), net.parameters().end());
    for (int k = 0; k < 50; ++k, ++coords) {
      const std::size_t p = rng.index(net.parameter_count()), i = rng.index(x.n);
      auto plus = base, minus = base;
      plus[p] += h;
      minus[p] -= h;
      net.set_parameters(plus);
      const double fp = summed_logits(net, x, i);
      net.set_parameters(minus);
      const double fm = summed_logits(net, x, i);
      net.set_parameters(base);
      const double fd = (fp - fm) / (2 * h), ad = j(i, p);
      worst = std::max(worst, std::abs(ad - fd) / std::max({std::abs(ad), std::abs(fd), 1e-6}));
    }
    ++nets;
  }
  return {worst <= 1e-4, std::to_string(nets) + " nets, " + std::to_string(coords) + " coords, worst rel err " + fmt(worst)};
}

// ------------------------------------------------------------------------ 2

Outcome regression_identity() {
  const auto s = SearchSpace::cell201();
  Rng rng(77);
  std::size_t ok = 0, singular = 0, tried = 0;
  double worst = 0.0;
  while (ok < 10 && tried < 100) {
    ++tried;
    const auto net = netgen::compile(netgen::random_arch(s, rng), s, rng);
    const auto b = toy_source().train_batch(rng, 6);
    const auto f = netgen::last_layer_features(net, b.x);
    const auto y = indicators::one_hot_labels(b.y, 10);
    try {
      const double e = indicators::ntk_regression_error(f, y, f, y, 0.0);
      worst = std::max(worst, e);
      ++ok;
    } catch (const Error& e) {
      if (e.code() != Errc::SingularSystem) throw;
      ++singular;  // constant features: the Gram is not invertible
    }
  }
  return {ok >= 10 && worst < 1e-7,
          std::to_string(ok) + " nets (" + std::to_string(singular) + " singular skipped), worst err " + fmt(worst)};
}

// ------------------------------------------------------------------------ 3

Outcome region_oracle() {
  std::vector<double> grid(10000);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -3.0 + 6.0 * static_cast<double>(i) / (grid.size() - 1);
  Matrix x(grid.size(), 1);
  for (std::size_t i = 0; i < grid.size(); ++i) x(i, 0) = grid[i];
  std::size_t match = 0, total = 0;
  for (std::size_t width : {2u, 4u, 8u}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed, ++total) {
      Rng rng(5000 + 100 * width + seed);
      const netgen::DenseReluNet net({1, width, 1}, rng);
      // Breakpoints -b/w split the line; count intervals hit by the grid.
      const auto& l = net.layers().front();
      std::vector<double> bp;
      for (std::size_t k = 0; k < l.bias.size(); ++k) bp.push_back(-l.bias[k] / l.weight(k, 0));
      std::sort(bp.begin(), bp.end());
      std::set<std::size_t> hit;
      for (double g : grid) hit.insert(static_cast<std::size_t>(std::upper_bound(bp.begin(), bp.end(), g) - bp.begin()));
      match += indicators::count_unique_patterns(net.forward(x).bits) == hit.size();
    }
  }
  return {match == total, std::to_string(match) + "/" + std::to_string(total) + " inits match"};
}

// ------------------------------------------------------------------------ 4

Outcome correlation() {
  const auto s = SearchSpace::toy_enum();
  const auto bench = bench::train_all(netgen::enumerate(s), s, toy_source().dataset(), {}, {0, 1, 2, 3, 4});
  const auto c = bench::correlation_report(bench, table_reports());
  const double tk = c.kappa.test.value_or(NAN), tr = c.regions.train.value_or(NAN), tm = c.mse.test.value_or(NAN);
  const double ts = c.ranksum.test.value_or(NAN);
  const bool signs = tk <= -0.2 && tr >= 0.2 && tm <= -0.2;
  const double best = std::max({std::abs(tk), std::abs(tr), std::abs(tm)});
  const bool combined = std::abs(ts) >= best - 0.1;
  return {signs && combined,
          "tau(kappa,test) " + fmt(tk) + ", tau(R,train) " + fmt(tr) + ", tau(MSE,test) " + fmt(tm) + ", tau(ranksum,test) " +
              fmt(ts) + " vs max " + fmt(best)};
}

// ------------------------------------------------------------------------ 5

Outcome search_effectiveness() {
  const auto s = SearchSpace::toy_enum();
  const auto reps = table_reports();
  const auto rs = bench::rank_sum(reps);
  auto sorted = rs;
  std::sort(sorted.begin(), sorted.end());
  const double cutoff = sorted[bench::top_fraction_count(reps.size()) - 1];
  std::set<std::string> top;
  for (std::size_t i = 0; i < reps.size(); ++i)
    if (rs[i] <= cutoff) top.insert(reps[i].arch);

  const search::TableEvaluator eval(s, toy_table());
  Outcome out{true, "top set " + std::to_string(top.size()) + " archs (rank-sum <= " + fmt(cutoff) + ")", {}};
  for (auto m : {search::Method::Reinforce, search::Method::Evolution, search::Method::FpNas}) {
    std::size_t hits = 0, max_evals = 0;
    std::map<std::string, int> derived;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      search::SearchConfig cfg;
      cfg.method = m;
      cfg.seed = seed;
      cfg.max_evaluations = 500;
      const auto r = search::run_search(s, eval, cfg);
      const auto name = netgen::arch_to_string(r.best, s);
      hits += top.count(name);
      ++derived[name];
      max_evals = std::max(max_evals, r.log.size());
    }
    const bool ok = hits >= 8 && max_evals <= 500;
    out.pass = out.pass && ok;
    std::string modes;
    for (const auto& [a, n] : derived) modes += " " + a + "x" + std::to_string(n);
    out.notes.push_back(search::method_name(m) + " " + (ok ? "PASS" : "FAIL") + ": " + std::to_string(hits) +
                        "/10 in top set, max evaluations " + std::to_string(max_evals) + ";" + modes);
  }
  return out;
}

// ------------------------------------------------------------------------ 6

Outcome accounting() {
  std::size_t runs = 0, bad = 0;
  auto check = [&](const SearchSpace& s, const search::Evaluator& eval, search::Method m, std::uint64_t seed,
                   std::optional<std::size_t> cap) {
    search::SearchConfig cfg;
    cfg.method = m;
    cfg.seed = seed;
    cfg.cap = cap;
    search::SearchRun run(s, eval, cfg);
    run.run();
    const auto& log = run.log();
    const auto& pts = run.trajectory().points;
    std::map<std::size_t, std::size_t> per_step;
    for (const auto& e : log) ++per_step[e.t];
    bool ok = pts.size() == run.t() + 1;
    std::size_t expected = m == search::Method::Evolution ? 256 : 0;
    if (m == search::Method::Evolution) ok = ok && per_step[0] == 256;
    for (std::size_t t = 1; t <= run.t(); ++t) {
      std::size_t n = 1;
      if (m == search::Method::FpNas) {
        double h = 0.0;  // entropy of the distribution the step sampled from
        for (double p : pts[t - 1])
          if (p > 0.0) h -= p * std::log(p);
        n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.25 * h)));
      }
      ok = ok && per_step[t] == n;
      expected += n;
    }
    ok = ok && log.size() == expected && run.evaluations() == expected;
    search::RewardNormalizer fresh;
    for (const auto& e : log) {
      IndicatorReport r;
      r.kappa = e.kappa;
      r.regions = e.regions;
      r.mse = e.mse;
      ok = ok && fresh.observe(r) == e.reward;
    }
    ++runs;
    bad += !ok;
  };
  const auto toy = SearchSpace::toy_enum();
  const search::TableEvaluator table(toy, toy_table());
  for (auto m : {search::Method::Reinforce, search::Method::Evolution, search::Method::FpNas})
    for (std::uint64_t seed = 0; seed < 3; ++seed) check(toy, table, m, seed, std::nullopt);

  const auto cell = SearchSpace::cell201();
  indicators::IndicatorConfig small;
  small.repeats = 1;
  small.batch_train = small.batch_test = 8;
  small.region_batch = 16;
  const search::TegEvaluator live(cell, std::make_shared<const data::DataSource>(data::make_toy_dataset()), small);
  for (auto m : {search::Method::Reinforce, search::Method::FpNas}) check(cell, live, m, 1, 60);
  return {bad == 0, std::to_string(runs - bad) + "/" + std::to_string(runs) + " runs replay exactly"};
}

// ------------------------------------------------------------------------ 7

Outcome exclusive_subsets() {
  std::vector<std::vector<IndicatorReport>> sets{table_reports()};
  const auto cell = SearchSpace::cell201();
  Rng rng(31);
  std::set<Architecture> seen;
  std::vector<Architecture> archs;
  while (archs.size() < 40) {
    auto a = netgen::random_arch(cell, rng);
    if (seen.insert(a).second) archs.push_back(a);
  }
  auto scored = search::score_all(archs, cell, toy_source(), {});
  std::vector<IndicatorReport> v;
  for (auto& [k, r] : scored) v.push_back(r);
  sets.push_back(v);

  std::string detail;
  bool pass = true;
  for (const auto& reps : sets) {
    const std::size_t n = reps.size(), k = static_cast<std::size_t>(std::ceil(n / 10.0));
    const auto s = bench::exclusive_subsets(reps);
    // Brute-force membership: fewer than k archs strictly ahead in (value, arch) order.
    auto admitted = [&](auto key, bool asc) {
      std::set<std::string> out;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t ahead = 0;
        for (std::size_t j = 0; j < n; ++j) {
          const double a = key(reps[j]), b = key(reps[i]);
          ahead += (asc ? a < b : a > b) || (a == b && reps[j].arch < reps[i].arch);
        }
        if (ahead < k) out.insert(reps[i].arch);
      }
      return out;
    };
    const auto tk = admitted([](const auto& r) { return r.kappa; }, true);
    const auto tr = admitted([](const auto& r) { return r.regions; }, false);
    const auto tm = admitted([](const auto& r) { return r.mse; }, true);
    bool ok = tk.size() == k && tr.size() == k && tm.size() == k && s.thresholds.k == k;
    std::set<std::string> all;
    for (auto* sub : {&s.a_kappa, &s.a_regions, &s.a_mse}) all.insert(sub->begin(), sub->end());
    ok = ok && all.size() == s.a_kappa.size() + s.a_regions.size() + s.a_mse.size();
    for (const auto& a : s.a_kappa) ok = ok && tk.count(a) && !tr.count(a) && !tm.count(a);
    for (const auto& a : s.a_regions) ok = ok && tr.count(a) && !tk.count(a) && !tm.count(a);
    for (const auto& a : s.a_mse) ok = ok && tm.count(a) && !tk.count(a) && !tr.count(a);
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + std::string("N=") + std::to_string(n) + " k=" + std::to_string(k) + " |A|=" +
              std::to_string(s.a_kappa.size()) + "/" + std::to_string(s.a_regions.size()) + "/" + std::to_string(s.a_mse.size());
  }
  return {pass, detail};
}

// ------------------------------------------------------------------------ 8

Outcome landscape_repro() {
  const auto s = SearchSpace::toy_enum();
  const search::Evaluator eval = search::TableEvaluator(s, toy_table());
  bool same = true, shared = true, consistent = true;
  double worst = 0.0;
  for (auto m : {search::Method::Reinforce, search::Method::Evolution, search::Method::FpNas}) {
    search::SearchConfig cfg;
    cfg.method = m;
    cfg.seed = 4;
    cfg.patience = 1000;
    cfg.cap = 60;
    const search::SearchRun parent(s, eval, cfg);

    auto eq = landscape::spawn_children(parent, 10, {9, 9});
    eq.child1.run();
    eq.child2.run();
    same = same && eq.child1.trajectory().points == eq.child2.trajectory().points && eq.child1.log() == eq.child2.log();

    auto at = parent;
    at.run_until(10);
    landscape::LandscapeConfig lc;
    lc.child_seeds = {1, 2};
    const auto res = landscape::build_landscape(parent, lc, eval);
    const auto& c1 = res.children.child1.trajectory().points;
    const auto& c2 = res.children.child2.trajectory().points;
    shared = shared && c1.front() == c2.front() && c1.front() == at.distribution();

    // Grid and trajectory coordinates against a direct projection.
    const auto& pca = res.projection.pca;
    auto direct = [&](const std::vector<double>& v) {
      std::array<double, 2> out{};
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t d = 0; d < v.size(); ++d) out[k] += pca.components(k, d) * (v[d] - pca.mean[d]);
      return out;
    };
    const auto grid = landscape::grid_sample(s, lc.grid, lc.grid_seed);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto d = direct(netgen::one_hot(grid[i], s));
      worst = std::max({worst, std::abs(d[0] - res.projection.grid[i][0]), std::abs(d[1] - res.projection.grid[i][1])});
    }
    for (std::size_t p = 0; p < 2; ++p) {
      const auto& pts = p == 0 ? c1 : c2;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto d = direct(pts[i]);
        worst = std::max({worst, std::abs(d[0] - res.projection.paths[p][i][0]), std::abs(d[1] - res.projection.paths[p][i][1])});
      }
    }
  }
  consistent = worst <= 1e-9;
  return {same && shared && consistent, std::string("equal seeds identical: ") + (same ? "yes" : "no") +
                                            ", spawn point shared: " + (shared ? "yes" : "no") + ", max coord diff " + fmt(worst)};
}

// ------------------------------------------------------------------------ 9

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "timing.json") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return out;
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "tegnas_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto cfg = (root / "config.json").string();
  std::ofstream(cfg) << R"({"space":"toy","seed":11,
    "indicators":{"repeats":2,"batch_train":16,"batch_test":16,"region_batch":32},
    "search":{"cap":40},
    "train":{"epochs":2,"seeds":[0,1]},
    "landscape":{"spawn_step":5,"grid":27,"interp":7}})";

  // Each command's arguments; {out} is substituted per run.
  const std::vector<std::pair<std::string, std::string>> commands{
      {"score", "score '|nor_conv_3x3~0|+|skip_connect~0|nor_conv_3x3~1|'"},
      {"score-all", "--out {out} score --all"},
      {"search-rl", "--out {out} search --method rl"},
      {"search-evo", "--out {out} search --method evolution"},
      {"search-fp", "--out {out} search --method fpnas"},
      {"landscape", "--out {out} landscape --parent " + (root / "parent").string()},
      {"bench-train", "--out {out} bench-train"},
      {"analyze", "--out {out} analyze --bench " + (root / "bench.csv").string() + " --scores " +
                      (root / "scores.jsonl").string()},
  };
  auto run = [&](const std::string& args, const fs::path& out, const char* threads) {
    std::string a = args;
    if (auto p = a.find("{out}"); p != std::string::npos) a.replace(p, 5, out.string());
    fs::create_directories(out);
    const std::string cmd = std::string(TEGNAS_CLI) + " --config " + cfg + " --threads " + threads + " " + a + " > " +
                            (out / "stdout.txt").string() + " 2> " + (out / "stderr.txt").string();
    return std::system(cmd.c_str());
  };
  // Fixtures for landscape and analyze.
  if (run("--out " + (root / "parent").string() + " search", root / "parent", "1") != 0 ||
      run("--out " + root.string() + "/fx score --all", root / "fx", "1") != 0 ||
      run("--out " + root.string() + "/fb bench-train", root / "fb", "1") != 0)
    return {false, "fixture commands failed"};
  fs::copy_file(root / "fx/scores.jsonl", root / "scores.jsonl");
  fs::copy_file(root / "fb/bench.csv", root / "bench.csv");

  Outcome out{true, "", {}};
  for (const auto& [name, args] : commands) {
    std::vector<std::map<std::string, std::string>> snaps;
    bool exit_ok = true;
    int i = 0;
    for (const char* threads : {"1", "1", "4"}) {
      const auto dir = root / (name + "-" + std::to_string(i++));
      exit_ok = exit_ok && run(args, dir, threads) == 0;
      snaps.push_back(snapshot(dir));
    }
    const bool ok = exit_ok && snaps[0] == snaps[1] && snaps[0] == snaps[2] && snaps[0].size() >= 2;
    out.pass = out.pass && ok;
    out.notes.push_back(name + " " + (ok ? "identical" : "DIFFERS") + " (" + std::to_string(snaps[0].size()) + " files)");
  }
  out.detail = std::to_string(commands.size()) + " commands x {2 runs at 1 thread, 1 run at 4 threads}";
  fs::remove_all(root);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria{
      {1, "jacobian vs central differences", 60, jacobian_check},
      {2, "regression identity on train batch", 60, regression_identity},
      {3, "region count vs breakpoint oracle", 60, region_oracle},
      {4, "toy correlation signs", 600, correlation},
      {5, "search effectiveness", 900, search_effectiveness},
      {6, "evaluation accounting replay", 60, accounting},
      {7, "exclusive subsets", 60, exclusive_subsets},
      {8, "landscape reproducibility", 300, landscape_repro},
      {9, "CLI determinism", 300, cli_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), {}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << "criterion " << c.id << " " << (pass ? "PASS" : "FAIL") << ": " << c.name << " (" << o.detail << "; "
              << fmt(secs, 3) << " s" << (in_time ? "" : ", over time limit") << ")\n";
    for (const auto& n : o.notes) std::cout << "    " << n << "\n";
    std::cout.flush();
  }
  return failed == 0 ? 0 : 1;
}
