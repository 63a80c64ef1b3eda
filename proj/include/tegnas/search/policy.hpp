#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

#include "tegnas/bench/analysis.hpp"
#include "tegnas/search/evaluator.hpp"
#include "tegnas/search/reward.hpp"

namespace tegnas::search {

using netgen::SpaceKind;

/// Independent categorical distribution per decision slot, parameterized by
/// logits.
class Policy {
 public:
  Policy() = default;
  explicit Policy(const SearchSpace& space) {
    for (auto k : space.slot_sizes()) logits_.emplace_back(k, 0.0);
  }

  std::size_t slots() const noexcept { return logits_.size(); }
  const std::vector<std::vector<double>>& logits() const noexcept { return logits_; }
  std::vector<std::vector<double>>& logits() noexcept { return logits_; }

  std::vector<double> probs(std::size_t slot) const {
    const auto& l = logits_[slot];
    const double mx = *std::max_element(l.begin(), l.end());
    std::vector<double> p(l.size());
    double z = 0.0;
    for (std::size_t k = 0; k < l.size(); ++k) z += p[k] = std::exp(l[k] - mx);
    for (auto& v : p) v /= z;
    return p;
  }

  /// Concatenated per-slot probabilities.
  std::vector<double> distribution() const {
    std::vector<double> out;
    for (std::size_t s = 0; s < slots(); ++s) {
      const auto p = probs(s);
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

  /// Sum of per-slot entropies, natural log.
  double entropy() const {
    double h = 0.0;
    for (std::size_t s = 0; s < slots(); ++s)
      for (double p : probs(s))
        if (p > 0.0) h -= p * std::log(p);
    return h;
  }

  double log_prob(const Architecture& a) const {
    double lp = 0.0;
    for (std::size_t s = 0; s < slots(); ++s) lp += std::log(probs(s)[a.choices[s]]);
    return lp;
  }

  /// Draws slots independently, conditioned on validity. Graph101 draws the
  /// adjacency from the valid-mask table weighted by its factorized
  /// probability (the distribution rejection sampling converges to, without
  /// its ~0.2% acceptance rate), then the vertex ops independently.
  Architecture sample(const SearchSpace& space, numkit::Rng& rng) const {
    auto draw = [&](std::size_t s) {
      const auto p = probs(s);
      double u = rng.uniform(), acc = 0.0;
      std::size_t k = 0;
      for (; k + 1 < p.size(); ++k) {
        acc += p[k];
        if (u < acc) break;
      }
      return k;
    };
    Architecture a{space.kind, std::vector<std::size_t>(slots())};
    std::size_t first = 0;
    if (space.kind == SpaceKind::Graph101) {
      const auto& table = netgen::detail::graph101_adjacency(space);
      const std::size_t n = space.edges.size();
      std::vector<double> lp0(n), lp1(n);
      for (std::size_t e = 0; e < n; ++e) {
        const auto p = probs(e);
        lp0[e] = std::log(p[0]);
        lp1[e] = std::log(p[1]);
      }
      std::vector<double> w(table.size());
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < table.size(); ++i) {
        double l = 0.0;
        for (std::size_t e = 0; e < n; ++e) l += (table[i] >> e) & 1u ? lp1[e] : lp0[e];
        w[i] = l;
        top = std::max(top, l);
      }
      double total = 0.0;
      for (auto& v : w) total += (v = std::exp(v - top));
      double u = rng.uniform() * total, acc = 0.0;
      std::size_t pick = 0;
      for (; pick + 1 < w.size(); ++pick) {
        acc += w[pick];
        if (u < acc) break;
      }
      for (std::size_t e = 0; e < n; ++e) a.choices[e] = (table[pick] >> e) & 1u;
      first = n;
    }
    for (std::size_t attempt = 0; attempt < netgen::kMaxSamplingAttempts; ++attempt) {
      for (std::size_t s = first; s < slots(); ++s) a.choices[s] = draw(s);
      if (netgen::is_valid(a, space)) return a;
    }
    throw Error(Errc::SamplingExhausted, "policy produced no valid architecture after 1000 draws");
  }

  /// Most probable choice per slot; ties go to the lower index.
  Architecture argmax(SpaceKind kind) const {
    Architecture a{kind, std::vector<std::size_t>(slots())};
    for (std::size_t s = 0; s < slots(); ++s)
      a.choices[s] = static_cast<std::size_t>(std::max_element(logits_[s].begin(), logits_[s].end()) - logits_[s].begin());
    return a;
  }

  /// logits += scale * (onehot(a) - p), slot by slot.
  void ascend(const Architecture& a, double scale) {
    for (std::size_t s = 0; s < slots(); ++s) {
      const auto p = probs(s);
      for (std::size_t k = 0; k < p.size(); ++k) logits_[s][k] += scale * ((a.choices[s] == k ? 1.0 : 0.0) - p[k]);
    }
  }

  bool finite() const {
    for (const auto& l : logits_)
      for (double v : l)
        if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::vector<std::vector<double>> logits_;
};

/// One scored architecture as recorded by a search.
struct Evaluated {
  Architecture arch;
  IndicatorReport report;
  double reward = 0.0;
};

// ---------------------------------------------------------------- REINFORCE

struct PolicyState {
  Policy policy;
  double lr = 0.04;
  double baseline = 0.0;
  double gamma = 0.9;
  std::size_t t = 0;
  friend bool operator==(const PolicyState&, const PolicyState&) = default;
};

/// Moves the baseline toward `reward`, then takes one policy-gradient step on
/// log p(a) scaled by the advantage.
inline void reinforce_step(PolicyState& st, const Architecture& a, double reward) {
  if (!std::isfinite(reward)) throw Error(Errc::NonFiniteGradient, "non-finite reward");
  st.baseline = st.gamma * st.baseline + (1.0 - st.gamma) * reward;
  st.policy.ascend(a, st.lr * (reward - st.baseline));
  if (!st.policy.finite()) throw Error(Errc::NonFiniteGradient, "policy logits became non-finite");
  ++st.t;
}

// ---------------------------------------------------------------- evolution

struct Member {
  Architecture arch;
  IndicatorReport report;
  std::size_t born = 0;
  friend bool operator==(const Member& a, const Member& b) { return a.arch == b.arch && a.born == b.born; }
};

struct Population {
  std::size_t capacity = 256;
  std::size_t tournament = 64;
  std::deque<Member> members;  // oldest first
  std::size_t births = 0;
  friend bool operator==(const Population&, const Population&) = default;
};

/// Position of the best candidate by rank-sum computed within the
/// candidate set; ties go to lower kappa, then arch string.
inline std::size_t best_by_rank_sum(const std::vector<const IndicatorReport*>& cands) {
  std::vector<IndicatorReport> reps;
  reps.reserve(cands.size());
  for (auto* c : cands) reps.push_back(*c);
  const auto rs = bench::rank_sum(reps);
  std::size_t best = 0;
  for (std::size_t i = 1; i < reps.size(); ++i) {
    const auto& a = reps[i];
    const auto& b = reps[best];
    if (rs[i] != rs[best] ? rs[i] < rs[best] : a.kappa != b.kappa ? a.kappa < b.kappa : a.arch < b.arch) best = i;
  }
  return best;
}

inline double diversity(const Population& pop) {
  const std::size_t n = pop.members.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      total += static_cast<double>(netgen::hamming(pop.members[i].arch, pop.members[j].arch));
  return total / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

/// Mean one-hot encoding of the population.
inline std::vector<double> population_distribution(const Population& pop, const SearchSpace& space) {
  std::vector<double> mean;
  for (const auto& m : pop.members) {
    const auto oh = netgen::one_hot(m.arch, space);
    if (mean.empty()) mean.assign(oh.size(), 0.0);
    for (std::size_t i = 0; i < oh.size(); ++i) mean[i] += oh[i];
  }
  for (auto& v : mean) v /= static_cast<double>(pop.members.size());
  return mean;
}

inline void push_member(Population& pop, Architecture a, IndicatorReport r) {
  pop.members.push_back({std::move(a), std::move(r), pop.births++});
  if (pop.members.size() > pop.capacity) pop.members.pop_front();
}

/// Tournament of `pop.tournament` members drawn without replacement; the
/// rank-sum winner is mutated, scored, appended, and the oldest removed.
inline Evaluated evolution_step(Population& pop, const SearchSpace& space, const Evaluator& eval, numkit::Rng& rng) {
  if (pop.members.size() < pop.capacity) throw Error(Errc::ConfigError, "population is not at capacity");
  const std::size_t n = pop.members.size(), k = std::min(pop.tournament, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
  std::vector<const IndicatorReport*> cands;
  for (std::size_t i = 0; i < k; ++i) cands.push_back(&pop.members[idx[i]].report);
  const auto& parent = pop.members[idx[best_by_rank_sum(cands)]];
  Architecture child = netgen::mutate(parent.arch, space, rng);
  auto rep = eval(child);
  push_member(pop, child, rep);
  return {std::move(child), std::move(rep), 0.0};
}

/// Population best by rank-sum over all members.
inline const Member& population_best(const Population& pop) {
  std::vector<const IndicatorReport*> cands;
  for (const auto& m : pop.members) cands.push_back(&m.report);
  return pop.members[best_by_rank_sum(cands)];
}

// ------------------------------------------------------------------- FP-NAS

struct FpState {
  Policy policy;
  double lr = 0.1;
  double lambda = 0.25;
  std::size_t t = 0;
  friend bool operator==(const FpState&, const FpState&) = default;
};

inline std::size_t fp_sample_count(const Policy& p, double lambda) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(lambda * p.entropy())));
}

/// Softmax of the batch rewards.
inline std::vector<double> fp_weights(const std::vector<double>& rewards) {
  const double mx = *std::max_element(rewards.begin(), rewards.end());
  std::vector<double> w(rewards.size());
  double z = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) z += w[i] = std::exp(rewards[i] - mx);
  for (auto& v : w) v /= z;
  return w;
}

/// One ascent step on sum_i w_i log p(a_i), gradients taken at the current
/// logits.
inline void fp_update(FpState& st, const std::vector<Architecture>& batch, const std::vector<double>& rewards) {
  if (batch.empty() || batch.size() != rewards.size()) throw Error(Errc::LengthMismatch, "batch and rewards differ");
  for (double r : rewards)
    if (!std::isfinite(r)) throw Error(Errc::NonFiniteGradient, "non-finite reward");
  const auto w = fp_weights(rewards);
  std::vector<std::vector<double>> probs;
  for (std::size_t s = 0; s < st.policy.slots(); ++s) probs.push_back(st.policy.probs(s));
  auto& logits = st.policy.logits();
  for (std::size_t i = 0; i < batch.size(); ++i)
    for (std::size_t s = 0; s < logits.size(); ++s)
      for (std::size_t k = 0; k < logits[s].size(); ++k)
        logits[s][k] += st.lr * w[i] * ((batch[i].choices[s] == k ? 1.0 : 0.0) - probs[s][k]);
  if (!st.policy.finite()) throw Error(Errc::NonFiniteGradient, "policy logits became non-finite");
  ++st.t;
}

/// Samples max(1, round(lambda * H)) architectures, scores them, and updates.
inline std::vector<Evaluated> fp_step(FpState& st, const SearchSpace& space, const Evaluator& eval,
                                      RewardNormalizer& norm, numkit::Rng& rng) {
  const std::size_t count = fp_sample_count(st.policy, st.lambda);
  std::vector<Evaluated> out;
  std::vector<Architecture> batch;
  std::vector<double> rewards;
  for (std::size_t i = 0; i < count; ++i) batch.push_back(st.policy.sample(space, rng));
  for (auto& a : batch) {
    auto rep = eval(a);
    const double r = norm.observe(rep);
    rewards.push_back(r);
    out.push_back({a, std::move(rep), r});
  }
  fp_update(st, batch, rewards);
  return out;
}

}  // namespace tegnas::search
