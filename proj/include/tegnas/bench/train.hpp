#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "tegnas/data.hpp"
#include "tegnas/netgen.hpp"

namespace tegnas::bench {

struct TrainConfig {
  std::size_t epochs = 12;
  std::size_t batch = 32;
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
};

struct TrainResult {
  double train_acc = 0.0;  // percent
  double test_acc = 0.0;   // percent
  bool diverged = false;
};

inline double accuracy(const netgen::CompiledNet& net, const data::LabeledBatch& b) {
  netgen::NetEvaluator ev(net);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < b.x.n; ++i) {
    const auto logits = ev.forward(b.x.sample(i));
    const auto best = static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    correct += best == b.y[i];
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(b.x.n);
}

/// Mini-batch SGD with momentum on softmax cross-entropy, cosine learning-rate
/// decay. Initialization and shuffling both come from `rng`.
inline TrainResult toy_train(const netgen::Architecture& arch, const netgen::SearchSpace& space,
                             const data::ToyDataset& ds, const TrainConfig& cfg, numkit::Rng& rng) {
  auto net = netgen::compile(arch, space, rng);
  const std::size_t p = net.parameter_count(), n = ds.train.x.n, k = net.classes();
  std::vector<double> grad(p), velocity(p, 0.0), dlogits(k);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const std::size_t steps_per_epoch = (n + cfg.batch - 1) / cfg.batch;
  const double total_steps = static_cast<double>(cfg.epochs * steps_per_epoch);
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (std::size_t start = 0; start < n; start += cfg.batch, ++step) {
      const std::size_t end = std::min(n, start + cfg.batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      {
        netgen::NetEvaluator ev(net);
        for (std::size_t b = start; b < end; ++b) {
          const auto x = ds.train.x.sample(order[b]);
          const auto logits = ev.forward(x);
          const double mx = *std::max_element(logits.begin(), logits.end());
          double z = 0.0;
          for (std::size_t c = 0; c < k; ++c) z += std::exp(logits[c] - mx);
          for (std::size_t c = 0; c < k; ++c)
            dlogits[c] = (std::exp(logits[c] - mx) / z - (c == ds.train.y[order[b]] ? 1.0 : 0.0)) /
                         static_cast<double>(end - start);
          ev.backward(x, dlogits, grad);
        }
      }
      const double lr = 0.5 * cfg.lr * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / total_steps));
      auto params = net.mutable_parameters();
      bool finite = true;
      for (std::size_t j = 0; j < p; ++j) {
        velocity[j] = cfg.momentum * velocity[j] + grad[j] + cfg.weight_decay * params[j];
        params[j] -= lr * velocity[j];
        finite = finite && std::isfinite(params[j]);
      }
      if (!finite) return {0.0, 0.0, true};
    }
  }
  return {accuracy(net, ds.train), accuracy(net, ds.test), false};
}

}  // namespace tegnas::bench
