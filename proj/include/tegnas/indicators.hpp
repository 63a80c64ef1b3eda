#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "tegnas/data.hpp"
#include "tegnas/netgen.hpp"
#include "tegnas/numkit.hpp"

namespace tegnas::indicators {

using numkit::Matrix;
using netgen::Architecture;
using netgen::SearchSpace;

struct IndicatorConfig {
  std::size_t repeats = 3;
  std::size_t batch_train = 64;
  std::size_t batch_test = 64;
  std::size_t region_batch = 256;
  double ridge_rel = 1e-6;
  double kappa_cap = 1e12;
  /// Per-repeat value recorded when the regression system cannot be solved.
  double mse_cap = 1e12;
  std::uint64_t base_seed = 0;
  /// false: mean l2 norm of the residual; true: mean squared l2 norm.
  bool squared_mse = false;
  data::RegionInputs region_inputs = data::RegionInputs::TrainData;
  std::optional<std::size_t> threads;

  void validate() const {
    if (repeats < 1) throw Error(Errc::ConfigError, "repeats must be at least 1");
    if (batch_train < 2 || batch_test < 2 || region_batch < 2) throw Error(Errc::ConfigError, "batches must be at least 2");
    if (!(ridge_rel >= 0.0)) throw Error(Errc::ConfigError, "ridge_rel must be non-negative");
    if (!(kappa_cap >= 1.0)) throw Error(Errc::ConfigError, "kappa_cap must be at least 1");
  }
};

struct RepeatResult {
  std::uint64_t seed = 0;
  double kappa = 0.0;
  double regions = 0.0;
  double mse = 0.0;
  bool kappa_capped = false;
  /// Set when a member computation failed and a sentinel was substituted.
  bool flagged = false;
};

struct IndicatorReport {
  std::string arch;
  double kappa = 0.0;
  double regions = 0.0;
  double mse = 0.0;
  std::vector<RepeatResult> per_repeat;
  std::vector<std::uint64_t> seeds;

  bool flagged() const {
    return std::any_of(per_repeat.begin(), per_repeat.end(), [](const auto& r) { return r.flagged; });
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["arch"] = arch;
    j["kappa"] = kappa;
    j["regions"] = regions;
    j["mse"] = mse;
    auto& reps = j["per_repeat"] = nlohmann::ordered_json::array();
    for (const auto& r : per_repeat)
      reps.push_back({{"seed", r.seed}, {"kappa", r.kappa}, {"regions", r.regions}, {"mse", r.mse},
                      {"kappa_capped", r.kappa_capped}, {"flagged", r.flagged}});
    j["seeds"] = seeds;
    return j;
  }

  static IndicatorReport from_json(const nlohmann::ordered_json& j) {
    IndicatorReport r;
    r.arch = j.at("arch").get<std::string>();
    r.kappa = j.at("kappa").get<double>();
    r.regions = j.at("regions").get<double>();
    r.mse = j.at("mse").get<double>();
    for (const auto& p : j.at("per_repeat"))
      r.per_repeat.push_back({p.at("seed").get<std::uint64_t>(), p.at("kappa").get<double>(), p.at("regions").get<double>(),
                              p.at("mse").get<double>(), p.value("kappa_capped", false), p.value("flagged", false)});
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    return r;
  }
};

// ---------------------------------------------------------------------------
// Kernel-level primitives.

struct KappaValue {
  double value;
  bool capped;
};

/// lambda_max / lambda_min of a PSD kernel, or `cap` when lambda_min is at or
/// below 1e-12 lambda_max.
inline KappaValue condition_number(const Matrix& kernel, double cap) {
  const auto eig = numkit::sym_eig(kernel);
  const double lmax = eig.values.front(), lmin = eig.values.back();
  if (!(lmax > 0.0)) throw Error(Errc::DegenerateKernel, "kernel has no positive eigenvalue");
  if (lmin <= 1e-12 * lmax) return {cap, true};
  return {std::min(lmax / lmin, cap), false};
}

inline Matrix ntk(const netgen::CompiledNet& net, const netgen::ImageBatch& x) {
  const Matrix j = netgen::jacobian(net, x);
  if (!j.all_finite()) throw Error(Errc::NonFiniteGradient, "Jacobian has non-finite entries");
  return numkit::gram(j);
}

/// Number of distinct rows.
inline std::size_t count_unique_patterns(const netgen::ActivationBits& bits) {
  struct Hash {
    std::size_t operator()(const std::vector<std::uint64_t>& v) const noexcept {
      std::uint64_t h = 0x9e3779b97f4a7c15ULL;
      for (auto w : v) h = numkit::mix64(h ^ w);
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_set<std::vector<std::uint64_t>, Hash> seen;
  for (std::size_t r = 0; r < bits.rows(); ++r) {
    auto row = bits.row(r);
    seen.emplace(row.begin(), row.end());
  }
  return seen.size();
}

inline Matrix one_hot_labels(const std::vector<std::size_t>& y, std::size_t classes) {
  Matrix m(y.size(), classes);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= classes) throw Error(Errc::ShapeMismatch, "label out of range");
    m(i, y[i]) = 1.0;
  }
  return m;
}

/// Kernel regression on last-layer features: G = F F^T + 1 (the +1 is the
/// classifier bias), predictions K_test G^-1 Y, error averaged over test rows.
inline double ntk_regression_error(const Matrix& f_train, const Matrix& y_train, const Matrix& f_test,
                                   const Matrix& y_test, double ridge_rel, bool squared = false) {
  if (f_train.rows() != y_train.rows() || f_test.rows() != y_test.rows() || f_train.cols() != f_test.cols() ||
      y_train.cols() != y_test.cols())
    throw Error(Errc::ShapeMismatch, "regression operands disagree in shape");
  Matrix g = numkit::gram(f_train);
  for (auto& v : g.data()) v += 1.0;
  Matrix k = numkit::mul_transposed(f_test, f_train);
  for (auto& v : k.data()) v += 1.0;
  const double ridge = ridge_rel * g.trace() / static_cast<double>(g.rows());
  const Matrix alpha = numkit::solve_spd(g, y_train, ridge);
  const Matrix pred = k * alpha;
  double total = 0.0;
  for (std::size_t i = 0; i < pred.rows(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < pred.cols(); ++c) {
      const double d = pred(i, c) - y_test(i, c);
      s += d * d;
    }
    total += squared ? s : std::sqrt(s);
  }
  return total / static_cast<double>(pred.rows());
}

// ---------------------------------------------------------------------------
// Per-repeat evaluation. Repeat i uses seed base_seed + i; from it, stream 0
// initializes the network, 1 draws the training batch, 2 the test batch and
// 3 the region inputs.

namespace detail {

enum Part : unsigned { kKappa = 1, kRegions = 2, kMse = 4, kAll = 7 };

inline RepeatResult run_repeat(const Architecture& arch, const SearchSpace& space, const data::DataSource& src,
                               const IndicatorConfig& cfg, std::size_t i, unsigned parts) {
  RepeatResult r;
  r.seed = cfg.base_seed + i;
  numkit::Rng root(r.seed);
  auto init_rng = root.split(0), train_rng = root.split(1), test_rng = root.split(2), region_rng = root.split(3);
  const auto net = netgen::compile(arch, space, init_rng);

  std::optional<data::LabeledBatch> train;
  if (parts & (kKappa | kMse)) train = src.train_batch(train_rng, cfg.batch_train);

  if (parts & kKappa) {
    try {
      const auto k = condition_number(ntk(net, train->x), cfg.kappa_cap);
      r.kappa = k.value;
      r.kappa_capped = k.capped;
    } catch (const Error&) {
      r.kappa = cfg.kappa_cap;
      r.kappa_capped = true;
      r.flagged = true;
    }
  }
  if (parts & kRegions) {
    const auto x = src.region_inputs(region_rng, cfg.region_batch, cfg.region_inputs);
    r.regions = static_cast<double>(count_unique_patterns(netgen::forward(net, x).bits));
  }
  if (parts & kMse) {
    const auto test = src.test_batch(test_rng, cfg.batch_test);
    try {
      r.mse = ntk_regression_error(netgen::last_layer_features(net, train->x), one_hot_labels(train->y, src.classes()),
                                   netgen::last_layer_features(net, test.x), one_hot_labels(test.y, src.classes()),
                                   cfg.ridge_rel, cfg.squared_mse);
      if (!std::isfinite(r.mse)) throw Error(Errc::SingularSystem, "non-finite regression error");
    } catch (const Error&) {
      r.mse = cfg.mse_cap;
      r.flagged = true;
    }
  }
  return r;
}

inline std::vector<RepeatResult> run_repeats(const Architecture& arch, const SearchSpace& space,
                                             const data::DataSource& src, const IndicatorConfig& cfg, unsigned parts) {
  cfg.validate();
  netgen::validate(arch, space);
  std::vector<RepeatResult> out(cfg.repeats);
  numkit::parallel_for(cfg.repeats, numkit::resolve_threads(cfg.threads),
                       [&](std::size_t i) { out[i] = run_repeat(arch, space, src, cfg, i, parts); });
  return out;
}

template <typename Get>
double mean_of(const std::vector<RepeatResult>& reps, Get get) {
  double s = 0.0;
  for (const auto& r : reps) s += get(r);
  return s / static_cast<double>(reps.size());
}

}  // namespace detail

/// Mean NTK condition number over repeats.
inline double kappa(const Architecture& arch, const SearchSpace& space, const data::DataSource& src,
                    const IndicatorConfig& cfg) {
  const auto reps = detail::run_repeats(arch, space, src, cfg, detail::kKappa);
  return detail::mean_of(reps, [](const auto& r) { return r.kappa; });
}

/// Mean count of distinct ReLU activation patterns over region_batch inputs.
inline double regions(const Architecture& arch, const SearchSpace& space, const data::DataSource& src,
                      const IndicatorConfig& cfg) {
  const auto reps = detail::run_repeats(arch, space, src, cfg, detail::kRegions);
  return detail::mean_of(reps, [](const auto& r) { return r.regions; });
}

/// Mean last-layer kernel-regression test error.
inline double reg_mse(const Architecture& arch, const SearchSpace& space, const data::DataSource& src,
                      const IndicatorConfig& cfg) {
  const auto reps = detail::run_repeats(arch, space, src, cfg, detail::kMse);
  return detail::mean_of(reps, [](const auto& r) { return r.mse; });
}

inline IndicatorReport evaluate(const Architecture& arch, const SearchSpace& space, const data::DataSource& src,
                                const IndicatorConfig& cfg) {
  IndicatorReport rep;
  rep.arch = netgen::arch_to_string(arch, space);
  rep.per_repeat = detail::run_repeats(arch, space, src, cfg, detail::kAll);
  rep.kappa = detail::mean_of(rep.per_repeat, [](const auto& r) { return r.kappa; });
  rep.regions = detail::mean_of(rep.per_repeat, [](const auto& r) { return r.regions; });
  rep.mse = detail::mean_of(rep.per_repeat, [](const auto& r) { return r.mse; });
  for (const auto& r : rep.per_repeat) rep.seeds.push_back(r.seed);
  return rep;
}

}  // namespace tegnas::indicators
