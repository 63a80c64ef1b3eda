#pragma once

#include <cstddef>
#include <vector>

#include "tegnas/netgen/net.hpp"

namespace tegnas::netgen {

/// Fully connected ReLU network on flat inputs. Used where a closed-form
/// region count exists (1-D input, one hidden layer).
class DenseReluNet {
 public:
  struct Layer {
    Matrix weight;  // out x in
    std::vector<double> bias;
  };

  /// `widths` = {input, hidden..., output}; weights and biases ~ N(0, 2/fan_in).
  DenseReluNet(const std::vector<std::size_t>& widths, numkit::Rng& rng) {
    if (widths.size() < 2) throw Error(Errc::ShapeMismatch, "need at least input and output widths");
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      Layer layer{Matrix(widths[l + 1], widths[l]), std::vector<double>(widths[l + 1])};
      numkit::kaiming_fill(rng, widths[l], layer.weight.data());
      numkit::kaiming_fill(rng, widths[l], layer.bias);
      layers_.push_back(std::move(layer));
    }
  }

  const std::vector<Layer>& layers() const noexcept { return layers_; }

  std::size_t relu_neurons() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) n += layers_[l].bias.size();
    return n;
  }

  /// Outputs (B x out) and hidden-unit sign bits for inputs (B x in).
  ForwardResult forward(const Matrix& x) const {
    if (x.cols() != layers_.front().weight.cols()) throw Error(Errc::ShapeMismatch, "input width mismatch");
    ForwardResult r{Matrix(x.rows(), layers_.back().bias.size()), ActivationBits(x.rows(), relu_neurons())};
    for (std::size_t i = 0; i < x.rows(); ++i) {
      std::vector<double> a(x.row(i).begin(), x.row(i).end());
      std::size_t bit = 0;
      for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        std::vector<double> z(layer.bias);
        for (std::size_t o = 0; o < z.size(); ++o)
          for (std::size_t k = 0; k < a.size(); ++k) z[o] += layer.weight(o, k) * a[k];
        if (l + 1 < layers_.size()) {
          for (std::size_t o = 0; o < z.size(); ++o) {
            if (z[o] > 0.0) r.bits.set(i, bit);
            else z[o] = 0.0;
            ++bit;
          }
        }
        a = std::move(z);
      }
      std::copy(a.begin(), a.end(), r.logits.row(i).begin());
    }
    return r;
  }

 private:
  std::vector<Layer> layers_;
};

}  // namespace tegnas::netgen
