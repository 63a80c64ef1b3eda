#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "tegnas/error.hpp"
#include "tegnas/netgen/net.hpp"
#include "tegnas/numkit/rng.hpp"

namespace tegnas::data {

using netgen::ImageBatch;

struct LabeledBatch {
  ImageBatch x;
  std::vector<std::size_t> y;
};

struct ToyConfig {
  std::size_t classes = 10;
  std::size_t n_train = 512;
  std::size_t n_test = 512;
  std::size_t channels = 3;
  std::size_t size = 8;
  double noise = 0.6;
  std::uint64_t seed = 1234;
};

/// Synthetic image classification set. Class c is a plane wave with its own
/// spatial frequency and per-channel colour; each sample gets a uniformly
/// random phase plus Gaussian pixel noise. Global pooling of any linear map of
/// the input averages the wave out, so only nonlinear feature maps separate
/// classes.
struct ToyDataset {
  ToyConfig cfg;
  LabeledBatch train;
  LabeledBatch test;
};

namespace detail {

inline LabeledBatch draw_split(const ToyConfig& cfg, const std::vector<std::vector<double>>& colour,
                               const std::vector<std::pair<int, int>>& freq, std::size_t n, numkit::Rng& rng) {
  const std::size_t s = cfg.size;
  LabeledBatch b{ImageBatch(n, cfg.channels, s, s), std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % cfg.classes;
    b.y[i] = c;
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    auto img = b.x.sample(i);
    for (std::size_t ch = 0; ch < cfg.channels; ++ch)
      for (std::size_t y = 0; y < s; ++y)
        for (std::size_t x = 0; x < s; ++x) {
          const double arg = 2.0 * std::numbers::pi * (freq[c].first * double(y) + freq[c].second * double(x)) / double(s);
          img[(ch * s + y) * s + x] = colour[c][ch] * std::cos(arg + phase) + cfg.noise * rng.normal();
        }
  }
  return b;
}

}  // namespace detail

inline ToyDataset make_toy_dataset(const ToyConfig& cfg = {}) {
  if (cfg.classes < 2 || cfg.n_train < cfg.classes || cfg.n_test < cfg.classes || cfg.size < 2)
    throw Error(Errc::ConfigError, "toy dataset needs at least 2 classes and one sample per class per split");
  numkit::Rng rng(cfg.seed);
  // Candidate frequencies with period dividing the image, excluding DC.
  std::vector<std::pair<int, int>> pool;
  for (int fy = 0; fy <= 2; ++fy)
    for (int fx = -2; fx <= 2; ++fx)
      if ((fy > 0 || fx > 0)) pool.emplace_back(fy, fx);
  std::vector<std::pair<int, int>> freq(cfg.classes);
  std::vector<std::vector<double>> colour(cfg.classes, std::vector<double>(cfg.channels));
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    freq[c] = pool[c % pool.size()];
    for (auto& v : colour[c]) v = rng.normal();
  }
  auto train_rng = rng.split(0), test_rng = rng.split(1);
  return {cfg, detail::draw_split(cfg, colour, freq, cfg.n_train, train_rng),
          detail::draw_split(cfg, colour, freq, cfg.n_test, test_rng)};
}

enum class RegionInputs { TrainData, UniformNoise };

/// Draws batches from the train and test pools of a dataset. Draws are
/// without replacement within a call and prefix-consistent: the first k
/// samples of a size-n draw equal a size-k draw from the same stream.
class DataSource {
 public:
  explicit DataSource(ToyDataset ds) : ds_(std::move(ds)) {}

  const ToyDataset& dataset() const noexcept { return ds_; }
  std::size_t classes() const noexcept { return ds_.cfg.classes; }

  LabeledBatch train_batch(numkit::Rng& rng, std::size_t n) const { return take(ds_.train, rng, n); }
  LabeledBatch test_batch(numkit::Rng& rng, std::size_t n) const { return take(ds_.test, rng, n); }

  ImageBatch region_inputs(numkit::Rng& rng, std::size_t n, RegionInputs kind = RegionInputs::TrainData) const {
    if (kind == RegionInputs::TrainData) return take(ds_.train, rng, n).x;
    const auto& t = ds_.train.x;
    ImageBatch b(n, t.channels, t.height, t.width);
    for (auto& v : b.data) v = 2.0 * rng.uniform() - 1.0;
    return b;
  }

 private:
  static LabeledBatch take(const LabeledBatch& pool, numkit::Rng& rng, std::size_t n) {
    const std::size_t m = pool.x.n;
    if (n > m) throw Error(Errc::ConfigError, "batch of " + std::to_string(n) + " exceeds pool of " + std::to_string(m));
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    LabeledBatch out{ImageBatch(n, pool.x.channels, pool.x.height, pool.x.width), std::vector<std::size_t>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      std::swap(idx[i], idx[i + rng.index(m - i)]);
      const auto src = pool.x.sample(idx[i]);
      std::copy(src.begin(), src.end(), out.x.sample(i).begin());
      out.y[i] = pool.y[idx[i]];
    }
    return out;
  }

  ToyDataset ds_;
};

}  // namespace tegnas::data
