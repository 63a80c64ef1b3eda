#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "tegnas/indicators.hpp"

namespace tegnas::search {

using indicators::IndicatorReport;
using netgen::Architecture;
using netgen::SearchSpace;

/// Any architecture scorer. Must be deterministic and safe to call from
/// several threads.
using Evaluator = std::function<IndicatorReport(const Architecture&)>;

/// Scores with the indicator suite and caches by architecture string.
class TegEvaluator {
 public:
  TegEvaluator(SearchSpace space, std::shared_ptr<const data::DataSource> src, indicators::IndicatorConfig cfg)
      : state_(std::make_shared<State>()) {
    cfg.validate();
    state_->space = std::move(space);
    state_->src = std::move(src);
    state_->cfg = cfg;
  }

  IndicatorReport operator()(const Architecture& a) const {
    const std::string key = netgen::arch_to_string(a, state_->space);
    {
      std::lock_guard lock(state_->mutex);
      if (auto it = state_->cache.find(key); it != state_->cache.end()) return it->second;
    }
    auto rep = indicators::evaluate(a, state_->space, *state_->src, state_->cfg);
    std::lock_guard lock(state_->mutex);
    return state_->cache.emplace(key, std::move(rep)).first->second;
  }

  std::size_t cached() const {
    std::lock_guard lock(state_->mutex);
    return state_->cache.size();
  }

 private:
  struct State {
    SearchSpace space;
    std::shared_ptr<const data::DataSource> src;
    indicators::IndicatorConfig cfg;
    std::mutex mutex;
    std::map<std::string, IndicatorReport> cache;
  };
  std::shared_ptr<State> state_;
};

/// Lookup into a precomputed table of reports; unknown architectures throw.
class TableEvaluator {
 public:
  TableEvaluator(SearchSpace space, std::map<std::string, IndicatorReport> table)
      : space_(std::make_shared<const SearchSpace>(std::move(space))),
        table_(std::make_shared<const std::map<std::string, IndicatorReport>>(std::move(table))) {}

  IndicatorReport operator()(const Architecture& a) const {
    const auto key = netgen::arch_to_string(a, *space_);
    const auto it = table_->find(key);
    if (it == table_->end()) throw Error(Errc::UnknownArch, "architecture not in table: " + key);
    return it->second;
  }

  const std::map<std::string, IndicatorReport>& table() const noexcept { return *table_; }

 private:
  std::shared_ptr<const SearchSpace> space_;
  std::shared_ptr<const std::map<std::string, IndicatorReport>> table_;
};

/// Scores every architecture of an enumerable space.
inline std::map<std::string, IndicatorReport> score_all(const std::vector<Architecture>& archs, const SearchSpace& space,
                                                        const data::DataSource& src, indicators::IndicatorConfig cfg,
                                                        std::optional<std::size_t> threads = std::nullopt) {
  std::vector<IndicatorReport> reps(archs.size());
  cfg.threads = 1;
  numkit::parallel_for(archs.size(), numkit::resolve_threads(threads),
                       [&](std::size_t i) { reps[i] = indicators::evaluate(archs[i], space, src, cfg); });
  std::map<std::string, IndicatorReport> out;
  for (auto& r : reps) out.emplace(r.arch, std::move(r));
  return out;
}

}  // namespace tegnas::search
