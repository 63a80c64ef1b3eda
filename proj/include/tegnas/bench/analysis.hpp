#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tegnas/bench/train.hpp"
#include "tegnas/indicators.hpp"

namespace tegnas::bench {

using indicators::IndicatorReport;
using netgen::Architecture;
using netgen::SearchSpace;

// ---------------------------------------------------------------------------
// Rank statistics.

/// Kendall tau-b.
inline double kendall_tau(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error(Errc::LengthMismatch, "tau operands differ in length");
  if (xs.size() < 2) throw Error(Errc::LengthMismatch, "tau needs at least two observations");
  const std::size_t n = xs.size();
  double concordant = 0.0, discordant = 0.0, tied_x = 0.0, tied_y = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = xs[i] - xs[j], dy = ys[i] - ys[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        tied_x += 1.0;
      } else if (dy == 0.0) {
        tied_y += 1.0;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  const double denom = std::sqrt((concordant + discordant + tied_x) * (concordant + discordant + tied_y));
  if (denom == 0.0) throw Error(Errc::AllTied, "tau undefined: one side is constant");
  return (concordant - discordant) / denom;
}

/// Competition ("min") ranks, 1 = best. `ascending` means smaller is better.
inline std::vector<double> competition_ranks(const std::vector<double>& v, bool ascending) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t better = 0;
    for (std::size_t j = 0; j < v.size(); ++j) better += ascending ? v[j] < v[i] : v[j] > v[i];
    r[i] = static_cast<double>(better + 1);
  }
  return r;
}

/// Per-architecture sum of ranks: kappa ascending, regions descending, MSE
/// ascending. Lower is better.
inline std::vector<double> rank_sum(const std::vector<IndicatorReport>& reps) {
  std::vector<double> k, r, m;
  for (const auto& rep : reps) {
    k.push_back(rep.kappa);
    r.push_back(rep.regions);
    m.push_back(rep.mse);
  }
  const auto rk = competition_ranks(k, true), rr = competition_ranks(r, false), rm = competition_ranks(m, true);
  std::vector<double> s(reps.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = rk[i] + rr[i] + rm[i];
  return s;
}

// ---------------------------------------------------------------------------
// Exclusive subsets.

/// Cutoff for one indicator: the value and arch string of the last admitted
/// architecture in (value, arch) order.
struct Threshold {
  double value = 0.0;
  std::string arch;
};

struct SubsetThresholds {
  Threshold kappa, regions, mse;
  std::size_t k = 0;  // archs admitted per indicator
};

struct ExclusiveSubsets {
  std::vector<std::string> a_kappa, a_regions, a_mse;
  SubsetThresholds thresholds;
};

inline std::size_t top_fraction_count(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n) - 1e-12));
}

namespace detail {

/// Indices of the top-k reports; `better(a, b)` orders best first, ties by
/// arch string.
template <typename Key>
std::vector<std::size_t> top_k(const std::vector<IndicatorReport>& reps, std::size_t k, Key key, bool ascending) {
  std::vector<std::size_t> idx(reps.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double va = key(reps[a]), vb = key(reps[b]);
    if (va != vb) return ascending ? va < vb : va > vb;
    return reps[a].arch < reps[b].arch;
  });
  idx.resize(k);
  return idx;
}

}  // namespace detail

/// A_kappa holds archs in the top 10% by kappa (lowest) but in neither the top
/// 10% by regions (highest) nor by MSE (lowest); likewise for the others.
inline ExclusiveSubsets exclusive_subsets(const std::vector<IndicatorReport>& reps) {
  if (reps.size() < 10) throw Error(Errc::TooFewArchs, "exclusive subsets need at least 10 architectures");
  const std::size_t k = top_fraction_count(reps.size());
  const auto tk = detail::top_k(reps, k, [](const auto& r) { return r.kappa; }, true);
  const auto tr = detail::top_k(reps, k, [](const auto& r) { return r.regions; }, false);
  const auto tm = detail::top_k(reps, k, [](const auto& r) { return r.mse; }, true);
  const std::set<std::size_t> sk(tk.begin(), tk.end()), sr(tr.begin(), tr.end()), sm(tm.begin(), tm.end());

  ExclusiveSubsets out;
  out.thresholds = {{reps[tk.back()].kappa, reps[tk.back()].arch},
                    {reps[tr.back()].regions, reps[tr.back()].arch},
                    {reps[tm.back()].mse, reps[tm.back()].arch},
                    k};
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const bool ik = sk.count(i), ir = sr.count(i), im = sm.count(i);
    if (ik && !ir && !im) out.a_kappa.push_back(reps[i].arch);
    if (ir && !ik && !im) out.a_regions.push_back(reps[i].arch);
    if (im && !ik && !ir) out.a_mse.push_back(reps[i].arch);
  }
  for (auto* v : {&out.a_kappa, &out.a_regions, &out.a_mse}) std::sort(v->begin(), v->end());
  return out;
}

// ---------------------------------------------------------------------------
// Operator and topology preference.

struct PreferenceStats {
  std::map<std::string, double> op_ratio;
  double mean_depth = 0.0;
};

/// Operator frequencies over all operator slots (edges for cell spaces,
/// interior vertices for Graph101) and mean cell depth.
inline PreferenceStats preference_stats(const std::vector<Architecture>& subset, const SearchSpace& space) {
  if (subset.empty()) throw Error(Errc::EmptySubset, "preference statistics of an empty subset");
  PreferenceStats st;
  for (const auto& op : space.op_vocab) st.op_ratio[op] = 0.0;
  std::size_t slots = 0;
  for (const auto& a : subset) {
    netgen::validate(a, space);
    const std::size_t first = space.is_cell() ? 0 : space.edges.size();
    for (std::size_t i = first; i < a.choices.size(); ++i, ++slots) st.op_ratio[space.op_vocab[a.choices[i]]] += 1.0;
    st.mean_depth += static_cast<double>(netgen::cell_depth(a, space));
  }
  for (auto& [op, v] : st.op_ratio) v /= static_cast<double>(slots);
  st.mean_depth /= static_cast<double>(subset.size());
  return st;
}

// ---------------------------------------------------------------------------
// Tabular benchmark.

struct AccuracyRow {
  double train_acc = 0.0;
  double test_acc = 0.0;
  friend bool operator==(const AccuracyRow&, const AccuracyRow&) = default;
};

struct TabularBench {
  std::string space_id;
  std::map<std::string, AccuracyRow> rows;
  friend bool operator==(const TabularBench&, const TabularBench&) = default;
};

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_accuracy(std::string_view text, std::size_t row) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw Error(Errc::ParseError, "row " + std::to_string(row) + ": bad number '" + std::string(text) + "'", row);
  if (!(v >= 0.0 && v <= 100.0))
    throw Error(Errc::ParseError, "row " + std::to_string(row) + ": accuracy outside [0, 100]", row);
  return v;
}

}  // namespace detail

/// CSV with header `arch,train_acc,test_acc`; error positions are 1-based line
/// numbers.
inline TabularBench parse_tabular(std::istream& in, const SearchSpace& space) {
  TabularBench b{space.id(), {}};
  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line)) throw Error(Errc::ParseError, "row 1: missing header", 1);
  ++row;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "arch,train_acc,test_acc") throw Error(Errc::ParseError, "row 1: unexpected header", 1);
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(','), c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      throw Error(Errc::ParseError, "row " + std::to_string(row) + ": expected 3 fields", row);
    const std::string arch = line.substr(0, c1);
    try {
      netgen::arch_from_string(arch, space);
    } catch (const Error& e) {
      throw Error(Errc::ParseError, "row " + std::to_string(row) + ": " + e.what(), row);
    }
    AccuracyRow r{detail::parse_accuracy(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), row),
                  detail::parse_accuracy(std::string_view(line).substr(c2 + 1), row)};
    if (!b.rows.emplace(arch, r).second)
      throw Error(Errc::ParseError, "row " + std::to_string(row) + ": duplicate architecture", row);
  }
  return b;
}

inline TabularBench load_tabular(const std::string& path, const SearchSpace& space) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
  return parse_tabular(in, space);
}

inline std::string serialize_tabular(const TabularBench& b) {
  std::string out = "arch,train_acc,test_acc\n";
  for (const auto& [arch, r] : b.rows) out += arch + "," + format_double(r.train_acc) + "," + format_double(r.test_acc) + "\n";
  return out;
}

/// Trains every architecture with each seed and records mean accuracies.
/// Seed s initializes and shuffles through Rng(s) for every architecture.
inline TabularBench train_all(const std::vector<Architecture>& archs, const SearchSpace& space,
                              const data::ToyDataset& ds, const TrainConfig& cfg, const std::vector<std::uint64_t>& seeds,
                              std::optional<std::size_t> threads = std::nullopt) {
  std::vector<AccuracyRow> rows(archs.size());
  numkit::parallel_for(archs.size(), numkit::resolve_threads(threads), [&](std::size_t i) {
    AccuracyRow acc;
    for (auto s : seeds) {
      numkit::Rng rng(s);
      const auto r = toy_train(archs[i], space, ds, cfg, rng);
      acc.train_acc += r.train_acc;
      acc.test_acc += r.test_acc;
    }
    acc.train_acc /= static_cast<double>(seeds.size());
    acc.test_acc /= static_cast<double>(seeds.size());
    rows[i] = acc;
  });
  TabularBench b{space.id(), {}};
  for (std::size_t i = 0; i < archs.size(); ++i) b.rows[netgen::arch_to_string(archs[i], space)] = rows[i];
  return b;
}

// ---------------------------------------------------------------------------
// Correlation report.

struct TauPair {
  std::optional<double> train, test;  // empty when undefined (one side constant)
};

struct CorrelationReport {
  std::size_t n = 0;
  TauPair kappa, regions, mse, ranksum;
};

/// Tau-b of each indicator, and of the negated rank-sum, against both
/// accuracies, over the reported architectures.
inline CorrelationReport correlation_report(const TabularBench& bench, const std::vector<IndicatorReport>& reps) {
  if (reps.size() < 2) throw Error(Errc::TooFewArchs, "correlation needs at least two scored architectures");
  std::vector<double> k, r, m, tr, te;
  for (const auto& rep : reps) {
    const auto it = bench.rows.find(rep.arch);
    if (it == bench.rows.end()) throw Error(Errc::UnknownArch, "no accuracy recorded for " + rep.arch);
    k.push_back(rep.kappa);
    r.push_back(rep.regions);
    m.push_back(rep.mse);
    tr.push_back(it->second.train_acc);
    te.push_back(it->second.test_acc);
  }
  auto rs = rank_sum(reps);
  for (auto& v : rs) v = -v;
  auto pair = [&](const std::vector<double>& x) {
    TauPair p;
    try {
      p.train = kendall_tau(x, tr);
    } catch (const Error&) {
    }
    try {
      p.test = kendall_tau(x, te);
    } catch (const Error&) {
    }
    return p;
  };
  return {reps.size(), pair(k), pair(r), pair(m), pair(rs)};
}

inline nlohmann::ordered_json analysis_json(const CorrelationReport& c, const ExclusiveSubsets& s,
                                            const std::vector<Architecture>& a_k, const std::vector<Architecture>& a_r,
                                            const std::vector<Architecture>& a_m, const SearchSpace& space) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  auto pair = [&](const TauPair& p) { return nlohmann::ordered_json{{"train", opt(p.train)}, {"test", opt(p.test)}}; };
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["taus"] = {{"kappa", pair(c.kappa)}, {"regions", pair(c.regions)}, {"mse", pair(c.mse)}, {"ranksum", pair(c.ranksum)}};
  auto thr = [](const Threshold& t) { return nlohmann::ordered_json{{"value", t.value}, {"arch", t.arch}}; };
  j["subsets"] = {{"k", s.thresholds.k},
                  {"thresholds", {{"kappa", thr(s.thresholds.kappa)}, {"regions", thr(s.thresholds.regions)}, {"mse", thr(s.thresholds.mse)}}},
                  {"kappa", s.a_kappa},
                  {"regions", s.a_regions},
                  {"mse", s.a_mse}};
  auto pref = [&](const std::vector<Architecture>& v) -> nlohmann::ordered_json {
    if (v.empty()) return nullptr;
    const auto st = preference_stats(v, space);
    nlohmann::ordered_json ops;
    for (const auto& [op, ratio] : st.op_ratio) ops[op] = ratio;
    return {{"op_ratio", ops}, {"mean_depth", st.mean_depth}};
  };
  j["preference"] = {{"kappa", pref(a_k)}, {"regions", pref(a_r)}, {"mse", pref(a_m)}};
  return j;
}

}  // namespace tegnas::bench
