#pragma once

#include <array>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tegnas/numkit/pca.hpp"
#include "tegnas/search.hpp"

namespace tegnas::landscape {

using netgen::Architecture;
using netgen::SearchSpace;
using search::SearchRun;
using search::TrajectoryLog;

struct Children {
  SearchRun child1;
  SearchRun child2;
};

/// Advances a copy of `parent` to step t and forks it into two continuations
/// that differ only in their random streams. Throws NoCheckpoint when the
/// parent stops before reaching t.
inline Children spawn_children(const SearchRun& parent, std::size_t t, std::array<std::uint64_t, 2> seeds) {
  if (parent.t() > t) throw Error(Errc::NoCheckpoint, "parent is already past step " + std::to_string(t));
  SearchRun at = parent;
  at.run_until(t);
  if (at.t() != t) throw Error(Errc::NoCheckpoint, "parent stopped at step " + std::to_string(at.t()) + " before step " + std::to_string(t));
  Children c{at, at};
  c.child1.begin_child(seeds[0], "child1");
  c.child2.begin_child(seeds[1], "child2");
  return c;
}

/// Per-slot argmax of a concatenated per-slot distribution vector.
inline Architecture discretize(const std::vector<double>& dist, const SearchSpace& space) {
  Architecture a{space.kind, {}};
  std::size_t off = 0;
  for (auto k : space.slot_sizes()) {
    if (off + k > dist.size()) throw Error(Errc::ShapeMismatch, "distribution shorter than the space encoding");
    std::size_t best = 0;
    for (std::size_t i = 1; i < k; ++i)
      if (dist[off + i] > dist[off + best]) best = i;
    a.choices.push_back(best);
    off += k;
  }
  if (off != dist.size()) throw Error(Errc::ShapeMismatch, "distribution longer than the space encoding");
  return a;
}

/// Scores `a`, or returns an all-NaN report for an invalid architecture
/// (a Graph101 argmax can violate the graph constraints).
inline indicators::IndicatorReport score_or_nan(const Architecture& a, const SearchSpace& space, const search::Evaluator& eval) {
  if (netgen::is_valid(a, space)) return eval(a);
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  indicators::IndicatorReport r;
  r.kappa = r.regions = r.mse = nan;
  return r;
}

inline std::string arch_label(const Architecture& a, const SearchSpace& space) {
  return netgen::is_valid(a, space) ? netgen::arch_to_string(a, space) : "invalid";
}

struct Projection {
  numkit::PcaModel pca;
  std::vector<std::vector<std::array<double, 2>>> paths;  // one per trajectory
  std::vector<std::array<double, 2>> grid;
};

inline std::array<double, 2> project2(const numkit::PcaModel& m, const std::vector<double>& v) {
  const auto p = m.project(v);
  return {p[0], p[1]};
}

/// Fits a 2-D PCA on the union of trajectory points and projects both the
/// trajectories and the one-hot encodings of the grid architectures in it.
inline Projection project_trajectories(const std::vector<TrajectoryLog>& logs, const std::vector<Architecture>& grid,
                                       const SearchSpace& space) {
  std::vector<std::vector<double>> pts;
  for (const auto& l : logs) pts.insert(pts.end(), l.points.begin(), l.points.end());
  Projection out{numkit::fit_pca(pts, 2), {}, {}};
  for (const auto& l : logs) {
    auto& path = out.paths.emplace_back();
    for (const auto& p : l.points) path.push_back(project2(out.pca, p));
  }
  for (const auto& a : grid) out.grid.push_back(project2(out.pca, netgen::one_hot(a, space)));
  return out;
}

struct InterpPoint {
  double alpha = 0.0;
  std::vector<double> dist;
  Architecture arch;
  indicators::IndicatorReport report;
  bool duplicate = false;  // same architecture as the previous point
};

/// Evaluates the argmax architecture along the straight line between two
/// distributions at n evenly spaced alphas in [0, 1].
inline std::vector<InterpPoint> interpolation_profile(const std::vector<double>& a, const std::vector<double>& b,
                                                      std::size_t n, const SearchSpace& space,
                                                      const search::Evaluator& eval) {
  if (n < 2) throw Error(Errc::ConfigError, "interpolation needs at least 2 points");
  if (a.size() != b.size()) throw Error(Errc::ShapeMismatch, "endpoint distributions differ in length");
  std::vector<InterpPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    InterpPoint p;
    p.alpha = static_cast<double>(i) / static_cast<double>(n - 1);
    p.dist.resize(a.size());
    for (std::size_t d = 0; d < a.size(); ++d) p.dist[d] = (1.0 - p.alpha) * a[d] + p.alpha * b[d];
    p.arch = discretize(p.dist, space);
    p.duplicate = !out.empty() && out.back().arch == p.arch;
    p.report = p.duplicate ? out.back().report : score_or_nan(p.arch, space, eval);
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export.

struct Row {
  std::string arch;
  double x = 0.0, y = 0.0;
  double kappa = 0.0, regions = 0.0, mse = 0.0;
  std::string source;
};

inline std::string to_csv(const std::vector<Row>& rows) {
  std::string out = "arch,x,y,kappa,regions,mse,source\n";
  for (const auto& r : rows)
    out += r.arch + "," + bench::format_double(r.x) + "," + bench::format_double(r.y) + "," + bench::format_double(r.kappa) +
           "," + bench::format_double(r.regions) + "," + bench::format_double(r.mse) + "," + r.source + "\n";
  return out;
}

struct LandscapeConfig {
  std::size_t spawn_step = 10;
  std::array<std::uint64_t, 2> child_seeds{1, 2};
  std::size_t grid = 512;
  std::size_t interp = 11;
  std::uint64_t grid_seed = 0;
};

struct LandscapeResult {
  std::vector<Row> rows;
  Projection projection;
  Children children;
  std::vector<InterpPoint> profile;

  nlohmann::ordered_json variance_json() const {
    const auto& evr = projection.pca.explained_variance_ratio;
    return {{"explained_variance_ratio", evr}, {"degenerate", projection.pca.degenerate}};
  }
};

/// Grid architectures: every architecture when the space has at most `count`,
/// otherwise `count` distinct uniform draws, in a seed-determined order.
inline std::vector<Architecture> grid_sample(const SearchSpace& space, std::size_t count, std::uint64_t seed) {
  if (space.is_cell() && netgen::space_size(space) <= count) return netgen::enumerate(space);
  numkit::Rng rng(seed);
  std::vector<Architecture> out;
  std::set<Architecture> seen;
  for (std::size_t tries = 0; out.size() < count && tries < 100 * count; ++tries) {
    auto a = netgen::random_arch(space, rng);
    if (seen.insert(a).second) out.push_back(std::move(a));
  }
  return out;
}

/// Runs children from the parent's step, projects everything in one basis,
/// scores the grid, trajectory argmax architectures and the interpolation
/// between the two children's final states, and assembles the CSV rows:
/// grid, the spawn point (parent), each child's trajectory, and the
/// non-duplicate interpolation points.
inline LandscapeResult build_landscape(const SearchRun& parent, const LandscapeConfig& cfg, const search::Evaluator& eval,
                                       std::optional<std::size_t> threads = std::nullopt) {
  const auto& space = parent.space();
  auto children = spawn_children(parent, cfg.spawn_step, cfg.child_seeds);
  children.child1.run();
  children.child2.run();

  const auto grid = grid_sample(space, cfg.grid, cfg.grid_seed);
  const std::vector<TrajectoryLog> logs{children.child1.trajectory(), children.child2.trajectory()};
  auto proj = project_trajectories(logs, grid, space);

  std::vector<indicators::IndicatorReport> grid_reps(grid.size());
  numkit::parallel_for(grid.size(), numkit::resolve_threads(threads), [&](std::size_t i) { grid_reps[i] = eval(grid[i]); });

  LandscapeResult res{{}, {}, std::move(children), {}};
  auto add = [&](const Architecture& a, const indicators::IndicatorReport& r, std::array<double, 2> xy, const char* src) {
    res.rows.push_back({arch_label(a, space), xy[0], xy[1], r.kappa, r.regions, r.mse, src});
  };
  for (std::size_t i = 0; i < grid.size(); ++i) add(grid[i], grid_reps[i], proj.grid[i], "grid");

  auto add_point = [&](const std::vector<double>& dist, const char* src) {
    const auto a = discretize(dist, space);
    add(a, score_or_nan(a, space, eval), project2(proj.pca, dist), src);
  };
  add_point(logs[0].points.front(), "parent");
  for (const auto& p : logs[0].points) add_point(p, "child1");
  for (const auto& p : logs[1].points) add_point(p, "child2");

  res.profile = interpolation_profile(logs[0].points.back(), logs[1].points.back(), cfg.interp, space, eval);
  for (const auto& p : res.profile)
    if (!p.duplicate) add(p.arch, p.report, project2(proj.pca, p.dist), "interp");
  res.projection = std::move(proj);
  return res;
}

}  // namespace tegnas::landscape
