#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tegnas/search/policy.hpp"

namespace tegnas::search {

enum class Method { Reinforce, Evolution, FpNas };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::Reinforce: return "rl";
    case Method::Evolution: return "evolution";
    case Method::FpNas: return "fpnas";
  }
  return "?";
}

inline Method method_from_name(std::string_view s) {
  if (s == "rl" || s == "reinforce") return Method::Reinforce;
  if (s == "evolution" || s == "evo") return Method::Evolution;
  if (s == "fpnas" || s == "fp-nas") return Method::FpNas;
  throw Error(Errc::ConfigError, "unknown search method '" + std::string(s) + "'");
}

inline std::size_t default_cap(Method m) {
  switch (m) {
    case Method::Reinforce: return 500;
    case Method::Evolution: return 1000;
    case Method::FpNas: return 100;
  }
  return 0;
}

inline StopMetric stop_metric(Method m) {
  switch (m) {
    case Method::Reinforce: return StopMetric::PolicyEntropy;
    case Method::Evolution: return StopMetric::PopulationDiversity;
    case Method::FpNas: return StopMetric::ArchParamEntropy;
  }
  return StopMetric::PolicyEntropy;
}

struct SearchConfig {
  Method method = Method::Reinforce;
  std::uint64_t seed = 0;
  std::optional<std::size_t> cap;  // steps; defaults per method
  std::size_t patience = 50;
  double delta = 1e-3;
  std::optional<std::size_t> max_evaluations;
  bool literal_signs = false;
  std::optional<double> lr;  // defaults: 0.04 REINFORCE, 0.1 FP-NAS
  double gamma = 0.9;
  double lambda = 0.25;
  std::size_t population = 256;
  std::size_t tournament = 64;
};

struct LogEntry {
  std::size_t t = 0;
  std::string arch;
  double kappa = 0.0, regions = 0.0, mse = 0.0, reward = 0.0;
  std::string method;

  nlohmann::ordered_json to_json() const {
    return {{"t", t}, {"arch", arch}, {"kappa", kappa}, {"regions", regions}, {"mse", mse}, {"reward", reward}, {"method", method}};
  }
  static LogEntry from_json(const nlohmann::ordered_json& j) {
    return {j.at("t").get<std::size_t>(),  j.at("arch").get<std::string>(), j.at("kappa").get<double>(),
            j.at("regions").get<double>(), j.at("mse").get<double>(),       j.at("reward").get<double>(),
            j.at("method").get<std::string>()};
  }
  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

inline std::string to_jsonl(const std::vector<LogEntry>& log) {
  std::string out;
  for (const auto& e : log) out += e.to_json().dump() + "\n";
  return out;
}

/// Ordered policy distributions (or population mean encodings) visited by a
/// run, one per completed step, starting with the initial state at step 0.
struct TrajectoryLog {
  std::string run_id;
  std::vector<std::size_t> steps;
  std::vector<std::vector<double>> points;
  std::optional<std::size_t> parent_step;
  std::optional<std::uint64_t> child_seed;
};

/// Sample, evaluate, update until the stop rule fires. Copying a run yields
/// an independent checkpoint.
class SearchRun {
 public:
  SearchRun(SearchSpace space, Evaluator eval, SearchConfig cfg)
      : space_(std::move(space)),
        eval_(std::move(eval)),
        cfg_(cfg),
        rng_(cfg.seed),
        norm_(cfg.literal_signs),
        stop_(stop_metric(cfg.method), cfg.cap.value_or(default_cap(cfg.method)), cfg.patience, cfg.delta) {
    traj_.run_id = method_name(cfg.method) + "-" + std::to_string(cfg.seed);
    switch (cfg_.method) {
      case Method::Reinforce:
        rl_ = PolicyState{Policy(space_), cfg_.lr.value_or(0.04), 0.0, cfg_.gamma, 0};
        break;
      case Method::FpNas:
        fp_ = FpState{Policy(space_), cfg_.lr.value_or(0.1), cfg_.lambda, 0};
        break;
      case Method::Evolution: {
        if (cfg_.population < 2 || cfg_.tournament < 1 || cfg_.tournament > cfg_.population)
          throw Error(Errc::ConfigError, "invalid population or tournament size");
        if (cfg_.max_evaluations && *cfg_.max_evaluations < cfg_.population)
          throw Error(Errc::ConfigError, "evaluation budget smaller than the warm-up population");
        pop_ = Population{cfg_.population, cfg_.tournament, {}, 0};
        std::vector<Architecture> warm;
        for (std::size_t i = 0; i < cfg_.population; ++i) warm.push_back(netgen::random_arch(space_, rng_));
        for (auto& a : warm) {
          auto rep = eval_(a);
          record(0, a, rep, norm_.observe(rep));
          push_member(*pop_, a, std::move(rep));
        }
        break;
      }
    }
    finish_step();
  }

  bool done() const noexcept { return done_; }
  std::size_t t() const noexcept { return t_; }
  std::size_t evaluations() const noexcept { return log_.size(); }
  const std::string& stop_reason() const noexcept { return reason_; }
  const std::vector<LogEntry>& log() const noexcept { return log_; }
  const TrajectoryLog& trajectory() const noexcept { return traj_; }
  const SearchConfig& config() const noexcept { return cfg_; }
  const SearchSpace& space() const noexcept { return space_; }
  const RewardNormalizer& normalizer() const noexcept { return norm_; }
  const std::optional<PolicyState>& rl_state() const noexcept { return rl_; }
  const std::optional<FpState>& fp_state() const noexcept { return fp_; }
  const std::optional<Population>& population() const noexcept { return pop_; }

  /// Evaluations the next step will spend.
  std::size_t next_step_cost() const {
    return cfg_.method == Method::FpNas ? fp_sample_count(fp_->policy, fp_->lambda) : 1;
  }

  /// Runs one step; no-op once done.
  void step() {
    if (done_) return;
    if (cfg_.max_evaluations && evaluations() + next_step_cost() > *cfg_.max_evaluations) {
      done_ = true;
      reason_ = "budget";
      return;
    }
    const std::size_t t = t_ + 1;
    switch (cfg_.method) {
      case Method::Reinforce: {
        const auto a = rl_->policy.sample(space_, rng_);
        auto rep = eval_(a);
        const double r = norm_.observe(rep);
        record(t, a, rep, r);
        reinforce_step(*rl_, a, r);
        break;
      }
      case Method::Evolution: {
        auto e = evolution_step(*pop_, space_, eval_, rng_);
        record(t, e.arch, e.report, norm_.observe(e.report));
        break;
      }
      case Method::FpNas: {
        for (const auto& e : fp_step(*fp_, space_, eval_, norm_, rng_)) record(t, e.arch, e.report, e.reward);
        break;
      }
    }
    t_ = t;
    finish_step();
  }

  void run() {
    while (!done_) step();
  }

  /// Steps until t reaches `target` or the run stops.
  void run_until(std::size_t target) {
    while (!done_ && t_ < target) step();
  }

  /// Replaces the random stream; everything else is kept.
  void reseed(std::uint64_t seed) { rng_ = numkit::Rng(seed); }

  /// Turns this copy into a child continuation: new random stream, and a
  /// trajectory restarted at the current point.
  void begin_child(std::uint64_t seed, std::string id) {
    reseed(seed);
    traj_ = TrajectoryLog{std::move(id), {t_}, {distribution()}, t_, seed};
  }

  /// Current stop-rule metric.
  double metric() const {
    switch (cfg_.method) {
      case Method::Reinforce: return rl_->policy.entropy();
      case Method::Evolution: return diversity(*pop_);
      case Method::FpNas: return fp_->policy.entropy();
    }
    return 0.0;
  }

  /// Current distribution vector over decision slots.
  std::vector<double> distribution() const {
    switch (cfg_.method) {
      case Method::Reinforce: return rl_->policy.distribution();
      case Method::FpNas: return fp_->policy.distribution();
      case Method::Evolution: return population_distribution(*pop_, space_);
    }
    return {};
  }

  /// Final architecture: most probable per slot for policy methods (falling
  /// back to the most probable evaluated architecture if that is invalid),
  /// rank-sum best of the population for evolution.
  Architecture derive() const {
    if (cfg_.method == Method::Evolution) return population_best(*pop_).arch;
    const Policy& p = cfg_.method == Method::Reinforce ? rl_->policy : fp_->policy;
    const auto a = p.argmax(space_.kind);
    if (netgen::is_valid(a, space_)) return a;
    std::optional<Architecture> best;
    double best_lp = 0.0;
    for (const auto& e : log_) {
      const auto cand = netgen::arch_from_string(e.arch, space_);
      const double lp = p.log_prob(cand);
      if (!best || lp > best_lp) {
        best = cand;
        best_lp = lp;
      }
    }
    if (!best) throw Error(Errc::InvalidArch, "no valid architecture to derive");
    return *best;
  }

  nlohmann::ordered_json result_json() const {
    return {{"method", method_name(cfg_.method)},
            {"best_arch", netgen::arch_to_string(derive(), space_)},
            {"stop_reason", reason_},
            {"steps", t_},
            {"evaluations", evaluations()}};
  }

 private:
  void record(std::size_t t, const Architecture& a, const IndicatorReport& r, double reward) {
    log_.push_back({t, netgen::arch_to_string(a, space_), r.kappa, r.regions, r.mse, reward, method_name(cfg_.method)});
  }

  void finish_step() {
    traj_.steps.push_back(t_);
    traj_.points.push_back(distribution());
    if (stop_.observe(t_, metric())) {
      done_ = true;
      reason_ = stop_.reason();
    }
  }

  SearchSpace space_;
  Evaluator eval_;
  SearchConfig cfg_;
  numkit::Rng rng_;
  RewardNormalizer norm_;
  StopRule stop_;
  std::optional<PolicyState> rl_;
  std::optional<FpState> fp_;
  std::optional<Population> pop_;
  std::size_t t_ = 0;
  bool done_ = false;
  std::string reason_;
  std::vector<LogEntry> log_;
  TrajectoryLog traj_;
};

struct SearchOutcome {
  Architecture best;
  std::string stop_reason;
  std::vector<LogEntry> log;
  TrajectoryLog trajectory;
};

inline SearchOutcome run_search(const SearchSpace& space, const Evaluator& eval, const SearchConfig& cfg) {
  SearchRun run(space, eval, cfg);
  run.run();
  return {run.derive(), run.stop_reason(), run.log(), run.trajectory()};
}

}  // namespace tegnas::search
