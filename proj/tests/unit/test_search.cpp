#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tegnas/search.hpp"

using namespace tegnas;
using namespace tegnas::search;
using netgen::Architecture;
using netgen::SearchSpace;
using numkit::Rng;

namespace {

IndicatorReport report(double k, double r, double m, std::string arch = "a") {
  IndicatorReport rep;
  rep.arch = std::move(arch);
  rep.kappa = k;
  rep.regions = r;
  rep.mse = m;
  return rep;
}

// Cheap deterministic scorer: more conv3x3 (last vocabulary entry for the toy
// space) is better on every indicator.
Evaluator synthetic(const SearchSpace& space) {
  return [space](const Architecture& a) {
    double score = 0.0;
    for (std::size_t i = 0; i < a.choices.size(); ++i) score += static_cast<double>(a.choices[i]) * (1.0 + 0.1 * i);
    return report(100.0 / (1.0 + score), 1.0 + score, 1.0 / (1.0 + score), netgen::arch_to_string(a, space));
  };
}

}  // namespace

// ------------------------------------------------------------------ reward

TEST(Reward, FirstObservationIsZero) {
  RewardNormalizer n;
  EXPECT_EQ(n.observe(report(10, 5, 1)), 0.0);
}

TEST(Reward, HalvingKappaIsPositive) {
  RewardNormalizer n;
  n.observe(report(10, 5, 1));
  EXPECT_GT(n.observe(report(5, 5, 1)), 0.0);
}

TEST(Reward, RunningRangeTrace) {
  RewardNormalizer n;
  std::vector<double> terms;
  for (double k : {10.0, 5.0, 20.0}) terms.push_back(n.observe_terms(report(k, 3, 0.5)).kappa);
  // t1: range [5,10], delta -5 -> +1; t2: range [5,20], delta +15 -> -1.
  EXPECT_EQ(terms, (std::vector<double>{0.0, 1.0, -1.0}));
}

TEST(Reward, SignsAndLiteralAblation) {
  RewardNormalizer n, lit(true);
  for (auto* x : {&n, &lit}) x->observe(report(1, 1, 1));
  const auto t = n.observe_terms(report(2, 2, 2));
  const auto l = lit.observe_terms(report(2, 2, 2));
  EXPECT_EQ(t.kappa, -1.0);
  EXPECT_EQ(t.regions, 1.0);
  EXPECT_EQ(t.mse, -1.0);
  EXPECT_EQ(l.kappa, 1.0);
  EXPECT_EQ(l.mse, 1.0);
}

TEST(Reward, ZeroRangeGivesZero) {
  RewardNormalizer n;
  n.observe(report(3, 3, 3));
  EXPECT_EQ(n.observe(report(3, 3, 3)), 0.0);
}

// ------------------------------------------------------------------ policy

TEST(Policy, UniformEntropy) {
  const Policy p(SearchSpace::cell201());
  EXPECT_NEAR(p.entropy(), 6.0 * std::log(5.0), 1e-12);
}

TEST(Reinforce, BaselineEma) {
  PolicyState st{Policy(SearchSpace::toy_enum())};
  reinforce_step(st, Architecture{netgen::SpaceKind::ToyEnum, {0, 1, 2}}, 1.0);
  EXPECT_DOUBLE_EQ(st.baseline, 0.1);
}

TEST(Reinforce, ZeroAdvantageLeavesLogits) {
  PolicyState st{Policy(SearchSpace::toy_enum())};
  st.baseline = 0.7;
  const auto before = st.policy;
  reinforce_step(st, Architecture{netgen::SpaceKind::ToyEnum, {2, 1, 0}}, 0.7);
  EXPECT_EQ(st.policy, before);
}

TEST(Reinforce, PositiveAdvantageRaisesChosenProbabilities) {
  const auto s = SearchSpace::cell201();
  Rng rng(1);
  PolicyState st{Policy(s)};
  for (auto& l : st.policy.logits())
    for (auto& v : l) v = rng.normal();
  const Architecture a = netgen::random_arch(s, rng);
  std::vector<double> before;
  for (std::size_t k = 0; k < a.choices.size(); ++k) before.push_back(st.policy.probs(k)[a.choices[k]]);
  reinforce_step(st, a, 1.0);
  for (std::size_t k = 0; k < a.choices.size(); ++k) {
    EXPECT_GT(st.policy.probs(k)[a.choices[k]], before[k]);
    double sum = 0.0;
    for (double v : st.policy.probs(k)) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Reinforce, NonFiniteRewardThrows) {
  PolicyState st{Policy(SearchSpace::toy_enum())};
  try {
    reinforce_step(st, Architecture{netgen::SpaceKind::ToyEnum, {0, 0, 0}}, std::nan(""));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonFiniteGradient);
  }
}

TEST(Policy, ArgmaxInvariantToPositiveScaling) {
  const auto s = SearchSpace::cell201();
  Rng rng(2);
  Policy p(s);
  for (auto& l : p.logits())
    for (auto& v : l) v = rng.normal();
  const auto a = p.argmax(s.kind);
  const auto probs = p.distribution();
  for (auto& l : p.logits())
    for (auto& v : l) v *= 3.0;
  EXPECT_EQ(p.argmax(s.kind), a);
  EXPECT_NE(p.distribution(), probs);
}

TEST(Policy, Graph101SamplesAreValid) {
  const auto s = SearchSpace::graph101();
  Policy p(s);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) EXPECT_TRUE(netgen::is_valid(p.sample(s, rng), s));
}

TEST(Policy, Graph101SamplerMatchesRejectionOracle) {
  const auto s = SearchSpace::graph101();
  Policy p(s);
  const std::size_t n = s.edges.size();
  for (std::size_t e = 0; e < n; ++e) {
    const bool chain = s.edges[e].to == s.edges[e].from + 1;
    p.logits()[e] = {0.0, chain ? 3.0 : -2.0};
  }
  auto is_chain = [&](const Architecture& a) {
    for (std::size_t e = 0; e < n; ++e)
      if (a.choices[e] != (s.edges[e].to == s.edges[e].from + 1 ? 1u : 0u)) return false;
    return true;
  };
  Rng r1(7), r2(8);
  const int draws = 20000;
  int hits_sampler = 0, hits_oracle = 0;
  for (int i = 0; i < draws; ++i) hits_sampler += is_chain(p.sample(s, r1));
  for (int i = 0; i < draws;) {
    Architecture a{s.kind, std::vector<std::size_t>(p.slots())};
    for (std::size_t k = 0; k < p.slots(); ++k) {
      const auto pr = p.probs(k);
      double u = r2.uniform(), acc = 0.0;
      std::size_t c = 0;
      for (; c + 1 < pr.size(); ++c)
        if (u < (acc += pr[c])) break;
      a.choices[k] = c;
    }
    if (!netgen::is_valid(a, s)) continue;
    hits_oracle += is_chain(a);
    ++i;
  }
  const double f1 = double(hits_sampler) / draws, f2 = double(hits_oracle) / draws;
  const double sd = std::sqrt(2.0 * f2 * (1.0 - f2) / draws);
  EXPECT_GT(f2, 0.1);
  EXPECT_NEAR(f1, f2, 4.0 * sd);
}

// ------------------------------------------------------------------ FP-NAS

TEST(Fp, SampleCountFollowsEntropy) {
  EXPECT_EQ(fp_sample_count(Policy(SearchSpace::cell201()), 0.25), 2u);  // round(0.25 * 6 ln 5) = 2
  EXPECT_EQ(fp_sample_count(Policy(SearchSpace::toy_enum()), 0.25), 1u);  // round(0.82) = 1
  Policy sharp(SearchSpace::toy_enum());
  for (auto& l : sharp.logits()) l[0] = 50.0;
  EXPECT_EQ(fp_sample_count(sharp, 0.25), 1u);
}

TEST(Fp, EqualRewardsGiveMeanLikelihoodAscent) {
  const auto s = SearchSpace::toy_enum();
  FpState st{Policy(s)};
  const std::vector<Architecture> batch{{s.kind, {0, 1, 2}}, {s.kind, {2, 2, 2}}};
  auto expected = st.policy;
  const auto p0 = st.policy;
  for (const auto& a : batch) {
    for (std::size_t k = 0; k < 3; ++k) {
      const auto pr = p0.probs(k);
      for (std::size_t o = 0; o < 3; ++o) expected.logits()[k][o] += 0.1 * 0.5 * ((a.choices[k] == o) - pr[o]);
    }
  }
  fp_update(st, batch, {0.3, 0.3});
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t o = 0; o < 3; ++o) EXPECT_NEAR(st.policy.logits()[k][o], expected.logits()[k][o], 1e-15);
}

TEST(Fp, DominatingRewardWeight) {
  const auto w = fp_weights({10.0, 0.0});
  EXPECT_GE(w[0], 0.99);
  EXPECT_NEAR(w[0] + w[1], 1.0, 1e-15);
}

// --------------------------------------------------------------- evolution

TEST(Evolution, IdenticalPopulationChildIsOneMutationAway) {
  const auto s = SearchSpace::cell201();
  Rng rng(4);
  const auto a = netgen::random_arch(s, rng);
  Population pop;
  for (int i = 0; i < 256; ++i) push_member(pop, a, report(1, 1, 1, netgen::arch_to_string(a, s)));
  const auto e = evolution_step(pop, s, synthetic(s), rng);
  EXPECT_EQ(netgen::hamming(e.arch, a), 1u);
  EXPECT_EQ(pop.members.size(), 256u);
  EXPECT_EQ(pop.members.front().born, 1u);  // member 0 was the oldest
  EXPECT_EQ(pop.members.back().arch, e.arch);
}

TEST(Evolution, SizeConstantAndOldestPopped) {
  const auto s = SearchSpace::toy_enum();
  Rng rng(5);
  Population pop;
  const auto eval = synthetic(s);
  for (int i = 0; i < 256; ++i) {
    auto a = netgen::random_arch(s, rng);
    push_member(pop, a, eval(a));
  }
  for (int i = 0; i < 50; ++i) {
    const auto oldest = pop.members.front().born;
    evolution_step(pop, s, eval, rng);
    EXPECT_EQ(pop.members.size(), 256u);
    EXPECT_EQ(pop.members.front().born, oldest + 1);
    for (std::size_t j = 1; j < pop.members.size(); ++j) EXPECT_LT(pop.members[j - 1].born, pop.members[j].born);
  }
}

TEST(Evolution, RankSumTieBreak) {
  // a: ranks 1+3+1 = 5, b: 2+1+2 = 5, c: 3+2+3 = 8; a and b tie, a has lower kappa.
  const auto a = report(1, 1, 1, "z"), b = report(2, 9, 2, "y"), c = report(3, 5, 3, "x");
  EXPECT_EQ(best_by_rank_sum({&a, &b, &c}), 0u);
  const auto d = report(1, 1, 1, "a");
  EXPECT_EQ(best_by_rank_sum({&a, &d}), 1u);  // full tie: arch string
}

TEST(Diversity, Examples) {
  const auto s = SearchSpace::cell201();
  Population same;
  const Architecture a{s.kind, {0, 1, 2, 3, 4, 0}};
  for (int i = 0; i < 5; ++i) push_member(same, a, {});
  EXPECT_EQ(diversity(same), 0.0);
  Population two;
  push_member(two, a, {});
  push_member(two, Architecture{s.kind, {0, 1, 2, 3, 1, 1}}, {});
  EXPECT_EQ(diversity(two), 2.0);
}

// --------------------------------------------------------------- stop rule

TEST(StopRule, ConstantMetricStopsAtPatience) {
  StopRule r(StopMetric::PolicyEntropy, 500, 50);
  std::size_t t = 0;
  while (!r.observe(t, 1.0)) ++t;
  EXPECT_EQ(t, 50u);
  EXPECT_EQ(r.reason(), "patience");
}

TEST(StopRule, SteadyDecreaseRunsToCap) {
  StopRule r(StopMetric::PolicyEntropy, 120, 50);
  std::size_t t = 0;
  while (!r.observe(t, std::exp(-0.01 * t))) ++t;
  EXPECT_EQ(t, 120u);
  EXPECT_EQ(r.reason(), "hard_cap");
}

TEST(StopRule, SmallDecreasesDoNotResetPatience) {
  StopRule r(StopMetric::PolicyEntropy, 1000, 10, 1e-3);
  std::size_t t = 0;
  while (!r.observe(t, 1.0 - 1e-5 * t)) ++t;
  EXPECT_EQ(t, 10u);
}

// ------------------------------------------------------------------ driver

TEST(Driver, DeterministicLog) {
  const auto s = SearchSpace::toy_enum();
  for (auto m : {Method::Reinforce, Method::Evolution, Method::FpNas}) {
    SearchConfig cfg;
    cfg.method = m;
    cfg.seed = 11;
    cfg.cap = 60;
    const auto a = run_search(s, synthetic(s), cfg), b = run_search(s, synthetic(s), cfg);
    EXPECT_EQ(a.log, b.log);
    EXPECT_EQ(a.best, b.best);
    EXPECT_EQ(to_jsonl(a.log), to_jsonl(b.log));
  }
}

TEST(Driver, EvaluationAccountingAndRewardReplay) {
  const auto s = SearchSpace::toy_enum();
  for (auto m : {Method::Reinforce, Method::Evolution, Method::FpNas}) {
    SearchConfig cfg;
    cfg.method = m;
    cfg.seed = 3;
    cfg.cap = 40;
    SearchRun run(s, synthetic(s), cfg);
    run.run();
    const auto& log = run.log();
    const auto& traj = run.trajectory();
    ASSERT_EQ(traj.points.size(), run.t() + 1);
    std::size_t expected = m == Method::Evolution ? 256 : 0;
    for (std::size_t t = 1; t <= run.t(); ++t) {
      if (m == Method::FpNas) {
        Policy p(s);  // rebuild entropy from the recorded distribution
        double h = 0.0;
        for (double v : traj.points[t - 1])
          if (v > 0.0) h -= v * std::log(v);
        expected += std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.25 * h)));
      } else {
        expected += 1;
      }
    }
    EXPECT_EQ(log.size(), expected);
    RewardNormalizer fresh;
    for (const auto& e : log) EXPECT_EQ(fresh.observe(report(e.kappa, e.regions, e.mse)), e.reward);
  }
}

TEST(Driver, RlStopsByHardCap) {
  const auto s = SearchSpace::cell201();
  SearchConfig cfg;
  cfg.method = Method::Reinforce;
  cfg.patience = 100000;
  SearchRun run(s, synthetic(s), cfg);
  run.run();
  EXPECT_EQ(run.t(), 500u);
  EXPECT_EQ(run.stop_reason(), "hard_cap");
}

TEST(Driver, BudgetIsRespected) {
  const auto s = SearchSpace::toy_enum();
  for (auto m : {Method::Reinforce, Method::Evolution, Method::FpNas}) {
    SearchConfig cfg;
    cfg.method = m;
    cfg.patience = 100000;
    cfg.max_evaluations = 300;
    const auto out = run_search(s, synthetic(s), cfg);
    EXPECT_LE(out.log.size(), 300u);
  }
}

TEST(Driver, TrajectoryBlocksAreDistributions) {
  const auto s = SearchSpace::cell201();
  for (auto m : {Method::Reinforce, Method::Evolution}) {
    SearchConfig cfg;
    cfg.method = m;
    cfg.cap = 20;
    SearchRun run(s, synthetic(s), cfg);
    run.run();
    for (const auto& p : run.trajectory().points)
      for (std::size_t slot = 0; slot < 6; ++slot) {
        double sum = 0.0;
        for (std::size_t k = 0; k < 5; ++k) sum += p[slot * 5 + k];
        EXPECT_NEAR(sum, 1.0, 1e-9);
      }
  }
}

TEST(Driver, SyntheticOptimumIsFound) {
  const auto s = SearchSpace::toy_enum();
  const Architecture best{s.kind, {2, 2, 2}};
  SearchConfig cfg;
  cfg.method = Method::Evolution;
  cfg.max_evaluations = 500;
  EXPECT_EQ(run_search(s, synthetic(s), cfg).best, best);
}

TEST(Driver, Graph101RunsAndDerivesValid) {
  const auto s = SearchSpace::graph101();
  for (auto m : {Method::Reinforce, Method::FpNas}) {
    SearchConfig cfg;
    cfg.method = m;
    cfg.cap = 15;
    const auto out = run_search(s, synthetic(s), cfg);
    EXPECT_TRUE(netgen::is_valid(out.best, s));
  }
}

TEST(Evaluators, TableAndMemo) {
  const auto s = SearchSpace::toy_enum();
  const auto archs = netgen::enumerate(s);
  auto src = std::make_shared<const data::DataSource>(data::make_toy_dataset());
  indicators::IndicatorConfig cfg;
  cfg.repeats = 1;
  cfg.batch_train = cfg.batch_test = 8;
  cfg.region_batch = 16;
  TegEvaluator memo(s, src, cfg);
  const auto r1 = memo(archs[5]);
  const auto r2 = memo(archs[5]);
  EXPECT_EQ(r1.to_json(), r2.to_json());
  EXPECT_EQ(memo.cached(), 1u);
  EXPECT_EQ(r1.to_json(), indicators::evaluate(archs[5], s, *src, cfg).to_json());

  TableEvaluator table(s, {{r1.arch, r1}});
  EXPECT_EQ(table(archs[5]).kappa, r1.kappa);
  try {
    table(archs[6]);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownArch);
  }
}

TEST(RunLog, JsonlLineShape) {
  LogEntry e{3, "|none~0|+|none~0|none~1|", 1.5, 2.0, 0.25, -0.5, "rl"};
  EXPECT_EQ(e.to_json().dump(),
            R"({"t":3,"arch":"|none~0|+|none~0|none~1|","kappa":1.5,"regions":2.0,"mse":0.25,"reward":-0.5,"method":"rl"})");
  EXPECT_EQ(LogEntry::from_json(nlohmann::ordered_json::parse(e.to_json().dump())), e);
}
