#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tegnas/bench.hpp"
#include "tegnas/landscape.hpp"
#include "tegnas/search.hpp"

namespace tegnas::cli {

using json = nlohmann::ordered_json;

/// Everything a command needs, read from a strict JSON file and overridden by
/// flags. The top-level seed drives search, indicator repeats and the
/// landscape grid; the dataset keeps its own seed. Thread count is never part
/// of the config.
struct RunConfig {
  std::string space = "toy";
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  std::size_t stem_channels = 8;
  std::size_t cells = 1;
  bool conv_bias = false;
  data::ToyConfig dataset;
  indicators::IndicatorConfig indicators;
  search::SearchConfig search;
  std::optional<std::string> table;  // JSONL of precomputed reports used instead of live scoring
  bench::TrainConfig train;
  std::vector<std::uint64_t> train_seeds{0, 1, 2, 3, 4};
  landscape::LandscapeConfig landscape;

  netgen::SearchSpace make_space() const {
    netgen::MacroConfig m;
    m.in_channels = dataset.channels;
    m.input_size = dataset.size;
    m.stem_channels = stem_channels;
    m.cells = cells;
    m.classes = dataset.classes;
    m.conv_bias = conv_bias;
    return netgen::SearchSpace::from_id(space, m);
  }

  /// Copies the top-level seed into the per-module configs.
  void propagate_seed() {
    search.seed = seed;
    indicators.base_seed = seed;
    landscape.grid_seed = seed;
  }

  void validate() const {
    if (space != "toy" && space != "cell201" && space != "graph101")
      throw Error(Errc::ConfigError, "space must be toy, cell201 or graph101");
    if (stem_channels == 0 || cells == 0) throw Error(Errc::ConfigError, "macro sizes must be positive");
    if (dataset.classes < 2 || dataset.n_train < 2 || dataset.n_test < 2 || dataset.size == 0 || dataset.channels == 0)
      throw Error(Errc::ConfigError, "dataset sizes too small");
    if (!(dataset.noise >= 0.0)) throw Error(Errc::ConfigError, "dataset.noise must be non-negative");
    indicators.validate();
    if (indicators.batch_train > dataset.n_train || indicators.batch_test > dataset.n_test ||
        indicators.region_batch > dataset.n_train)
      throw Error(Errc::ConfigError, "indicator batches exceed the dataset");
    if (search.cap && *search.cap == 0) throw Error(Errc::ConfigError, "search.cap must be positive");
    if (search.patience == 0) throw Error(Errc::ConfigError, "search.patience must be positive");
    if (!(search.delta >= 0.0)) throw Error(Errc::ConfigError, "search.delta must be non-negative");
    if (!(search.gamma >= 0.0 && search.gamma < 1.0)) throw Error(Errc::ConfigError, "search.gamma must be in [0, 1)");
    if (!(search.lambda > 0.0)) throw Error(Errc::ConfigError, "search.lambda must be positive");
    if (train.epochs == 0 || train.batch == 0 || !(train.lr > 0.0)) throw Error(Errc::ConfigError, "invalid train settings");
    if (train_seeds.empty()) throw Error(Errc::ConfigError, "train.seeds must not be empty");
    if (landscape.interp < 2) throw Error(Errc::ConfigError, "landscape.interp must be at least 2");
    if (landscape.grid == 0) throw Error(Errc::ConfigError, "landscape.grid must be positive");
  }

  // Run location (out) and threads stay out of the snapshot.
  json to_json() const {
    auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
    json j;
    j["space"] = space;
    j["seed"] = seed;
    j["macro"] = {{"stem_channels", stem_channels}, {"cells", cells}, {"conv_bias", conv_bias}};
    j["dataset"] = {{"classes", dataset.classes}, {"n_train", dataset.n_train}, {"n_test", dataset.n_test},
                    {"channels", dataset.channels}, {"size", dataset.size},       {"noise", dataset.noise},
                    {"seed", dataset.seed}};
    j["indicators"] = {{"repeats", indicators.repeats},
                       {"batch_train", indicators.batch_train},
                       {"batch_test", indicators.batch_test},
                       {"region_batch", indicators.region_batch},
                       {"ridge_rel", indicators.ridge_rel},
                       {"kappa_cap", indicators.kappa_cap},
                       {"mse_cap", indicators.mse_cap},
                       {"squared_mse", indicators.squared_mse},
                       {"region_inputs", indicators.region_inputs == data::RegionInputs::TrainData ? "train" : "noise"}};
    j["search"] = {{"method", search::method_name(search.method)},
                   {"cap", opt(search.cap)},
                   {"patience", search.patience},
                   {"delta", search.delta},
                   {"max_evaluations", opt(search.max_evaluations)},
                   {"literal_signs", search.literal_signs},
                   {"lr", opt(search.lr)},
                   {"gamma", search.gamma},
                   {"lambda", search.lambda},
                   {"population", search.population},
                   {"tournament", search.tournament},
                   {"table", opt(table)}};
    j["train"] = {{"epochs", train.epochs},         {"batch", train.batch},
                  {"lr", train.lr},                 {"momentum", train.momentum},
                  {"weight_decay", train.weight_decay}, {"seeds", train_seeds}};
    j["landscape"] = {{"spawn_step", landscape.spawn_step},
                      {"child_seeds", landscape.child_seeds},
                      {"grid", landscape.grid},
                      {"interp", landscape.interp}};
    return j;
  }

  /// Strict: unknown keys and wrong types are ConfigErrors; missing keys keep
  /// their defaults.
  static RunConfig from_json(const json& j) {
    RunConfig c;
    auto section = [](const json& parent, const char* name) -> const json* {
      if (!parent.contains(name) || parent.at(name).is_null()) return nullptr;
      if (!parent.at(name).is_object()) throw Error(Errc::ConfigError, std::string(name) + " must be an object");
      return &parent.at(name);
    };
    auto keys = [](const json* o, const std::string& where, std::set<std::string> allowed) {
      if (!o) return;
      for (auto it = o->begin(); it != o->end(); ++it)
        if (!allowed.count(it.key())) throw Error(Errc::ConfigError, "unknown key '" + it.key() + "' in " + where);
    };
    auto get = [](const json* o, const char* key, auto& dst) {
      if (!o || !o->contains(key)) return;
      using T = std::decay_t<decltype(dst)>;
      try {
        const auto& v = o->at(key);
        if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
          if (!v.is_number_unsigned()) throw Error(Errc::ConfigError, std::string(key) + " must be a non-negative integer");
        }
        if constexpr (std::is_same_v<T, double>) {
          if (!v.is_number()) throw Error(Errc::ConfigError, std::string(key) + " must be a number");
        }
        dst = v.template get<T>();
      } catch (const nlohmann::json::exception&) {
        throw Error(Errc::ConfigError, std::string("bad value for '") + key + "'");
      }
    };
    auto get_opt = [&](const json* o, const char* key, auto& dst) {
      if (!o || !o->contains(key)) return;
      if (o->at(key).is_null()) {
        dst.reset();
        return;
      }
      typename std::decay_t<decltype(dst)>::value_type v{};
      get(o, key, v);
      dst = v;
    };

    if (!j.is_object()) throw Error(Errc::ConfigError, "config must be a JSON object");
    keys(&j, "config", {"space", "seed", "out", "macro", "dataset", "indicators", "search", "train", "landscape"});
    get(&j, "space", c.space);
    get(&j, "seed", c.seed);
    get_opt(&j, "out", c.out);

    const json* m = section(j, "macro");
    keys(m, "macro", {"stem_channels", "cells", "conv_bias"});
    get(m, "stem_channels", c.stem_channels);
    get(m, "cells", c.cells);
    get(m, "conv_bias", c.conv_bias);

    const json* d = section(j, "dataset");
    keys(d, "dataset", {"classes", "n_train", "n_test", "channels", "size", "noise", "seed"});
    get(d, "classes", c.dataset.classes);
    get(d, "n_train", c.dataset.n_train);
    get(d, "n_test", c.dataset.n_test);
    get(d, "channels", c.dataset.channels);
    get(d, "size", c.dataset.size);
    get(d, "noise", c.dataset.noise);
    get(d, "seed", c.dataset.seed);

    const json* ind = section(j, "indicators");
    keys(ind, "indicators",
         {"repeats", "batch_train", "batch_test", "region_batch", "ridge_rel", "kappa_cap", "mse_cap", "squared_mse",
          "region_inputs"});
    get(ind, "repeats", c.indicators.repeats);
    get(ind, "batch_train", c.indicators.batch_train);
    get(ind, "batch_test", c.indicators.batch_test);
    get(ind, "region_batch", c.indicators.region_batch);
    get(ind, "ridge_rel", c.indicators.ridge_rel);
    get(ind, "kappa_cap", c.indicators.kappa_cap);
    get(ind, "mse_cap", c.indicators.mse_cap);
    get(ind, "squared_mse", c.indicators.squared_mse);
    std::string inputs = "train";
    get(ind, "region_inputs", inputs);
    if (inputs == "train") c.indicators.region_inputs = data::RegionInputs::TrainData;
    else if (inputs == "noise") c.indicators.region_inputs = data::RegionInputs::UniformNoise;
    else throw Error(Errc::ConfigError, "indicators.region_inputs must be train or noise");

    const json* s = section(j, "search");
    keys(s, "search",
         {"method", "cap", "patience", "delta", "max_evaluations", "literal_signs", "lr", "gamma", "lambda", "population",
          "tournament", "table"});
    std::string method = search::method_name(c.search.method);
    get(s, "method", method);
    c.search.method = search::method_from_name(method);
    get_opt(s, "cap", c.search.cap);
    get(s, "patience", c.search.patience);
    get(s, "delta", c.search.delta);
    get_opt(s, "max_evaluations", c.search.max_evaluations);
    get(s, "literal_signs", c.search.literal_signs);
    get_opt(s, "lr", c.search.lr);
    get(s, "gamma", c.search.gamma);
    get(s, "lambda", c.search.lambda);
    get(s, "population", c.search.population);
    get(s, "tournament", c.search.tournament);
    get_opt(s, "table", c.table);

    const json* t = section(j, "train");
    keys(t, "train", {"epochs", "batch", "lr", "momentum", "weight_decay", "seeds"});
    get(t, "epochs", c.train.epochs);
    get(t, "batch", c.train.batch);
    get(t, "lr", c.train.lr);
    get(t, "momentum", c.train.momentum);
    get(t, "weight_decay", c.train.weight_decay);
    get(t, "seeds", c.train_seeds);

    const json* l = section(j, "landscape");
    keys(l, "landscape", {"spawn_step", "child_seeds", "grid", "interp"});
    get(l, "spawn_step", c.landscape.spawn_step);
    get(l, "child_seeds", c.landscape.child_seeds);
    get(l, "grid", c.landscape.grid);
    get(l, "interp", c.landscape.interp);
    return c;
  }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses JSON text; syntax errors become ParseErrors carrying the byte offset.
inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ParseError, what + ": " + e.what(), e.byte);
  }
}

inline std::map<std::string, indicators::IndicatorReport> load_reports(const std::string& path) {
  std::map<std::string, indicators::IndicatorReport> out;
  std::istringstream in(read_file(path));
  std::string line;
  for (std::size_t row = 1; std::getline(in, line); ++row) {
    if (line.empty()) continue;
    try {
      auto rep = indicators::IndicatorReport::from_json(parse_json(line, path + " line " + std::to_string(row)));
      out[rep.arch] = std::move(rep);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ParseError, path + " line " + std::to_string(row) + ": " + e.what(), row);
    }
  }
  return out;
}

}  // namespace tegnas::cli
