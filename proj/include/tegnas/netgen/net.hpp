#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "tegnas/netgen/arch.hpp"
#include "tegnas/numkit/init.hpp"
#include "tegnas/numkit/matrix.hpp"

namespace tegnas::netgen {

using numkit::Matrix;

/// A batch of images, NCHW, row-major.
struct ImageBatch {
  std::size_t n = 0;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  ImageBatch() = default;
  ImageBatch(std::size_t n_, std::size_t c, std::size_t h, std::size_t w)
      : n(n_), channels(c), height(h), width(w), data(n_ * c * h * w, 0.0) {}

  std::size_t sample_size() const noexcept { return channels * height * width; }
  std::span<const double> sample(std::size_t i) const { return {data.data() + i * sample_size(), sample_size()}; }
  std::span<double> sample(std::size_t i) { return {data.data() + i * sample_size(), sample_size()}; }
};

/// One sign bit per ReLU neuron per sample, packed 64 to a word.
class ActivationBits {
 public:
  ActivationBits() = default;
  ActivationBits(std::size_t rows, std::size_t bits)
      : rows_(rows), bits_(bits), words_per_row_((bits + 63) / 64), words_(rows * words_per_row_, 0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t bits_per_row() const noexcept { return bits_; }
  std::span<const std::uint64_t> row(std::size_t r) const {
    return {words_.data() + r * words_per_row_, words_per_row_};
  }
  bool test(std::size_t r, std::size_t bit) const {
    return (words_[r * words_per_row_ + bit / 64] >> (bit % 64)) & 1U;
  }
  void set(std::size_t r, std::size_t bit) { words_[r * words_per_row_ + bit / 64] |= std::uint64_t{1} << (bit % 64); }

 private:
  std::size_t rows_ = 0;
  std::size_t bits_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> words_;
};

inline constexpr std::size_t kNoConv = std::numeric_limits<std::size_t>::max();

struct ConvSpec {
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t kernel;
  std::size_t weight_offset;
  std::optional<std::size_t> bias_offset;

  std::size_t fan_in() const noexcept { return in_channels * kernel * kernel; }
  std::size_t weight_count() const noexcept { return out_channels * fan_in(); }
};

struct OpInstance {
  OpKind kind = OpKind::Identity;
  std::size_t conv = kNoConv;  // index into CompiledNet::convs for conv ops
  /// On an input-to-output path. Only live ReLUs contribute activation bits.
  bool live = true;
};

/// Node j of a cell: value = post(sum over inputs of op(value[src])).
struct NodePlan {
  struct Input {
    std::size_t source;
    OpInstance op;
  };
  std::vector<Input> inputs;
  OpInstance post;
};

struct CellPlan {
  std::vector<NodePlan> nodes;  // nodes[0] is the cell input
};

/// A concrete ReLU network compiled from an architecture. Immutable after
/// construction except through set_parameters (used by the trainer and by
/// finite-difference checks).
class CompiledNet {
 public:
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<const double> parameters() const noexcept { return params_; }
  void set_parameters(std::vector<double> p) {
    if (p.size() != params_.size()) throw Error(Errc::ShapeMismatch, "parameter vector length differs");
    params_ = std::move(p);
  }
  std::span<double> mutable_parameters() noexcept { return params_; }

  std::size_t classes() const noexcept { return classes_; }
  std::size_t feature_dim() const noexcept { return channels_; }
  /// ReLU units on live paths.
  std::size_t relu_neurons() const noexcept { return relu_ops_ * channels_ * height_ * width_; }
  std::size_t in_channels() const noexcept { return in_channels_; }
  std::size_t input_size() const noexcept { return height_; }

  std::size_t classifier_weight_offset() const noexcept { return classifier_w_; }
  std::size_t classifier_bias_offset() const noexcept { return classifier_b_; }

  const std::vector<ConvSpec>& convs() const noexcept { return convs_; }
  const std::vector<CellPlan>& cells() const noexcept { return cells_; }

  friend CompiledNet compile(const Architecture&, const SearchSpace&, numkit::Rng&);
  friend class NetEvaluator;

 private:
  std::size_t in_channels_ = 0;
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t classes_ = 0;
  std::size_t relu_ops_ = 0;
  std::size_t stem_ = 0;  // index of the stem conv
  std::vector<ConvSpec> convs_;
  std::vector<CellPlan> cells_;
  std::size_t classifier_w_ = 0;
  std::size_t classifier_b_ = 0;
  std::vector<double> params_;
};

/// Builds the network and draws every parameter (weights and biases) from
/// Kaiming normal N(0, 2/fan_in), in layer order, from `rng`.
inline CompiledNet compile(const Architecture& arch, const SearchSpace& space, numkit::Rng& rng) {
  validate(arch, space);
  const MacroConfig& m = space.macro;
  if (m.stem_channels == 0 || m.input_size == 0 || m.in_channels == 0 || m.classes == 0 || m.cells == 0)
    throw Error(Errc::ShapeMismatch, "macro configuration has a zero dimension");

  CompiledNet net;
  net.in_channels_ = m.in_channels;
  net.channels_ = m.stem_channels;
  net.height_ = net.width_ = m.input_size;
  net.classes_ = m.classes;

  std::size_t offset = 0;
  auto add_conv = [&](std::size_t in_c, std::size_t k) {
    ConvSpec c{in_c, m.stem_channels, k, offset, std::nullopt};
    offset += c.weight_count();
    if (m.conv_bias) {
      c.bias_offset = offset;
      offset += c.out_channels;
    }
    net.convs_.push_back(c);
    return net.convs_.size() - 1;
  };
  const auto reach = detail::reachability(arch, space);
  const bool output_live = reach.from_input.back();
  auto make_op = [&](OpKind kind, bool live) {
    OpInstance op{kind, kNoConv, output_live && live};
    if (kind == OpKind::Conv1x1 || kind == OpKind::Conv3x3) {
      op.conv = add_conv(m.stem_channels, kind == OpKind::Conv1x1 ? 1 : 3);
      if (op.live) ++net.relu_ops_;
    }
    return op;
  };

  net.stem_ = add_conv(m.in_channels, 3);
  for (std::size_t c = 0; c < m.cells; ++c) {
    CellPlan cell;
    cell.nodes.resize(space.nodes);
    if (space.is_cell()) {
      for (std::size_t e = 0; e < space.edges.size(); ++e) {
        const auto& edge = space.edges[e];
        cell.nodes[edge.to].inputs.push_back({edge.from, make_op(space.op_kind(arch.choices[e]), reach.from_input[edge.from] && reach.to_output[edge.to])});
      }
    } else {
      for (std::size_t j = 1; j < space.nodes; ++j) {
        for (std::size_t e = 0; e < space.edges.size(); ++e)
          if (space.edges[e].to == j && arch.choices[e] != 0)
            cell.nodes[j].inputs.push_back({space.edges[e].from, OpInstance{OpKind::Identity, kNoConv}});
        if (j + 1 < space.nodes)
          cell.nodes[j].post = make_op(space.op_kind(arch.choices[space.edges.size() + j - 1]), reach.from_input[j] && reach.to_output[j]);
      }
    }
    net.cells_.push_back(std::move(cell));
  }
  net.classifier_w_ = offset;
  offset += m.classes * m.stem_channels;
  net.classifier_b_ = offset;
  offset += m.classes;

  net.params_.assign(offset, 0.0);
  std::span<double> p(net.params_);
  for (const auto& c : net.convs_) {
    numkit::kaiming_fill(rng, c.fan_in(), p.subspan(c.weight_offset, c.weight_count()));
    if (c.bias_offset) numkit::kaiming_fill(rng, c.fan_in(), p.subspan(*c.bias_offset, c.out_channels));
  }
  numkit::kaiming_fill(rng, m.stem_channels, p.subspan(net.classifier_w_, m.classes * m.stem_channels));
  numkit::kaiming_fill(rng, m.stem_channels, p.subspan(net.classifier_b_, m.classes));
  return net;
}

/// Per-sample forward and reverse passes over a CompiledNet with reusable
/// scratch buffers. Not thread-safe; make one per thread.
class NetEvaluator {
 public:
  explicit NetEvaluator(const CompiledNet& net) : net_(net) {
    const std::size_t n_nodes = net.cells_.empty() ? 0 : net.cells_.front().nodes.size();
    const std::size_t act = net.channels_ * net.height_ * net.width_;
    sums_.assign(net.cells_.size(), std::vector<std::vector<double>>(n_nodes, std::vector<double>(act)));
    values_ = sums_;
    grads_ = std::vector<std::vector<double>>(n_nodes, std::vector<double>(act));
    scratch_.assign(act, 0.0);
    scratch2_.assign(act, 0.0);
    relu_buf_.assign(act, 0.0);
    grelu_buf_.assign(act, 0.0);
    stem_out_.assign(act, 0.0);
    features_.assign(net.channels_, 0.0);
    logits_.assign(net.classes_, 0.0);
    build_pool_counts();
  }

  /// Forward one sample. Returns logits; features() and the node caches stay
  /// valid until the next call. When `bits` is non-null, ReLU signs are
  /// written into row `bits_row`.
  std::span<const double> forward(std::span<const double> x, ActivationBits* bits = nullptr, std::size_t bits_row = 0) {
    const auto& net = net_;
    const std::size_t hw = net.height_ * net.width_;
    if (x.size() != net.in_channels_ * hw) throw Error(Errc::ShapeMismatch, "sample size does not match network input");
    std::size_t bit = 0;
    std::span<const double> params(net.params_);

    std::fill(stem_out_.begin(), stem_out_.end(), 0.0);
    conv_forward(net.convs_[net.stem_], params, x, stem_out_);

    const std::vector<double>* input = &stem_out_;
    for (std::size_t c = 0; c < net.cells_.size(); ++c) {
      const auto& cell = net.cells_[c];
      auto& sums = sums_[c];
      auto& values = values_[c];
      values[0] = *input;
      for (std::size_t j = 1; j < cell.nodes.size(); ++j) {
        auto& sum = sums[j];
        std::fill(sum.begin(), sum.end(), 0.0);
        for (const auto& in : cell.nodes[j].inputs) apply_op(in.op, values[in.source], sum, bits, bits_row, bit);
        auto& value = values[j];
        if (cell.nodes[j].post.kind == OpKind::Identity) {
          value = sum;
        } else {
          std::fill(value.begin(), value.end(), 0.0);
          apply_op(cell.nodes[j].post, sum, value, bits, bits_row, bit);
        }
      }
      input = &values.back();
    }

    const auto& out = *input;
    for (std::size_t ch = 0; ch < net.channels_; ++ch) {
      double s = 0.0;
      for (std::size_t i = 0; i < hw; ++i) s += out[ch * hw + i];
      features_[ch] = s / static_cast<double>(hw);
    }
    for (std::size_t k = 0; k < net.classes_; ++k) {
      double s = params[net.classifier_b_ + k];
      for (std::size_t ch = 0; ch < net.channels_; ++ch) s += params[net.classifier_w_ + k * net.channels_ + ch] * features_[ch];
      logits_[k] = s;
    }
    return logits_;
  }

  std::span<const double> features() const noexcept { return features_; }

  /// Reverse pass for the most recent forward(): accumulates
  /// d(dlogits . logits)/d(params) into `grad`.
  void backward(std::span<const double> x, std::span<const double> dlogits, std::span<double> grad) {
    const auto& net = net_;
    const std::size_t hw = net.height_ * net.width_;
    std::span<const double> params(net.params_);
    if (grad.size() != params.size()) throw Error(Errc::ShapeMismatch, "gradient buffer length differs");

    for (std::size_t k = 0; k < net.classes_; ++k) {
      const double g = dlogits[k];
      grad[net.classifier_b_ + k] += g;
      for (std::size_t ch = 0; ch < net.channels_; ++ch) grad[net.classifier_w_ + k * net.channels_ + ch] += g * features_[ch];
    }
    std::vector<double>& g_out = scratch2_;
    for (std::size_t ch = 0; ch < net.channels_; ++ch) {
      double g = 0.0;
      for (std::size_t k = 0; k < net.classes_; ++k) g += params[net.classifier_w_ + k * net.channels_ + ch] * dlogits[k];
      g /= static_cast<double>(hw);
      std::fill(g_out.begin() + ch * hw, g_out.begin() + (ch + 1) * hw, g);
    }

    for (std::size_t c = net.cells_.size(); c-- > 0;) {
      const auto& cell = net.cells_[c];
      for (auto& g : grads_) std::fill(g.begin(), g.end(), 0.0);
      grads_.back() = g_out;
      for (std::size_t j = cell.nodes.size(); j-- > 1;) {
        const auto& node = cell.nodes[j];
        std::vector<double>* g_sum = &grads_[j];
        if (node.post.kind != OpKind::Identity) {
          std::fill(scratch_.begin(), scratch_.end(), 0.0);
          op_backward(node.post, sums_[c][j], grads_[j], scratch_, grad);
          g_sum = &scratch_;
        }
        for (const auto& in : node.inputs) op_backward(in.op, values_[c][in.source], *g_sum, grads_[in.source], grad);
      }
      g_out = grads_[0];
    }
    conv_backward_weights(net.convs_[net.stem_], x, g_out, grad);
  }

 private:
  void build_pool_counts() {
    const std::size_t h = net_.height_, w = net_.width_;
    pool_inv_count_.assign(h * w, 0.0);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t ny = std::min(y + 1, h - 1) - (y == 0 ? 0 : y - 1) + 1;
        const std::size_t nx = std::min(x + 1, w - 1) - (x == 0 ? 0 : x - 1) + 1;
        pool_inv_count_[y * w + x] = 1.0 / static_cast<double>(ny * nx);
      }
  }

  void apply_op(const OpInstance& op, const std::vector<double>& in, std::vector<double>& out, ActivationBits* bits,
                std::size_t bits_row, std::size_t& bit) {
    switch (op.kind) {
      case OpKind::Zero:
        return;
      case OpKind::Identity:
        for (std::size_t i = 0; i < in.size(); ++i) out[i] += in[i];
        return;
      case OpKind::AvgPool3x3:
        avg_pool(in, out);
        return;
      case OpKind::Conv1x1:
      case OpKind::Conv3x3: {
        for (std::size_t i = 0; i < in.size(); ++i) {
          const bool on = in[i] > 0.0;
          scratch_[i] = on ? in[i] : 0.0;
          if (bits && on && op.live) bits->set(bits_row, bit + i);
        }
        if (op.live) bit += in.size();
        conv_forward(net_.convs_[op.conv], net_.params_, scratch_, out);
        return;
      }
    }
  }

  /// Given d(out), accumulates d(in) into g_in and parameter gradients into grad.
  void op_backward(const OpInstance& op, const std::vector<double>& in, const std::vector<double>& g_out,
                   std::vector<double>& g_in, std::span<double> grad) {
    switch (op.kind) {
      case OpKind::Zero:
        return;
      case OpKind::Identity:
        for (std::size_t i = 0; i < in.size(); ++i) g_in[i] += g_out[i];
        return;
      case OpKind::AvgPool3x3:
        avg_pool_backward(g_out, g_in);
        return;
      case OpKind::Conv1x1:
      case OpKind::Conv3x3: {
        const auto& spec = net_.convs_[op.conv];
        for (std::size_t i = 0; i < in.size(); ++i) relu_buf_[i] = in[i] > 0.0 ? in[i] : 0.0;
        conv_backward_weights(spec, relu_buf_, g_out, grad);
        std::fill(grelu_buf_.begin(), grelu_buf_.end(), 0.0);
        conv_backward_input(spec, g_out, grelu_buf_);
        for (std::size_t i = 0; i < in.size(); ++i)
          if (in[i] > 0.0) g_in[i] += grelu_buf_[i];
        return;
      }
    }
  }

  // Same-padded, stride-1 convolution helpers (channels-first).
  void conv_forward(const ConvSpec& c, std::span<const double> params, std::span<const double> in, std::span<double> out) const {
    const long h = static_cast<long>(net_.height_), w = static_cast<long>(net_.width_);
    const long k = static_cast<long>(c.kernel), pad = k / 2;
    const std::size_t hw = net_.height_ * net_.width_;
    for (std::size_t co = 0; co < c.out_channels; ++co) {
      double* o = out.data() + co * hw;
      if (c.bias_offset) {
        const double b = params[*c.bias_offset + co];
        for (std::size_t i = 0; i < hw; ++i) o[i] += b;
      }
      for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
        const double* src = in.data() + ci * hw;
        const double* wt = params.data() + c.weight_offset + (co * c.in_channels + ci) * c.kernel * c.kernel;
        for (long ky = 0; ky < k; ++ky) {
          for (long kx = 0; kx < k; ++kx) {
            const double wv = wt[ky * k + kx];
            const long y0 = std::max(0L, pad - ky), y1 = std::min(h, h + pad - ky);
            const long x0 = std::max(0L, pad - kx), x1 = std::min(w, w + pad - kx);
            for (long y = y0; y < y1; ++y) {
              const double* srow = src + (y + ky - pad) * w + (kx - pad);
              double* orow = o + y * w;
              for (long x = x0; x < x1; ++x) orow[x] += wv * srow[x];
            }
          }
        }
      }
    }
  }

  void conv_backward_weights(const ConvSpec& c, std::span<const double> in, std::span<const double> g_out,
                             std::span<double> grad) const {
    const long h = static_cast<long>(net_.height_), w = static_cast<long>(net_.width_);
    const long k = static_cast<long>(c.kernel), pad = k / 2;
    const std::size_t hw = net_.height_ * net_.width_;
    for (std::size_t co = 0; co < c.out_channels; ++co) {
      const double* go = g_out.data() + co * hw;
      if (c.bias_offset) {
        double s = 0.0;
        for (std::size_t i = 0; i < hw; ++i) s += go[i];
        grad[*c.bias_offset + co] += s;
      }
      for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
        const double* src = in.data() + ci * hw;
        double* gw = grad.data() + c.weight_offset + (co * c.in_channels + ci) * c.kernel * c.kernel;
        for (long ky = 0; ky < k; ++ky) {
          for (long kx = 0; kx < k; ++kx) {
            const long y0 = std::max(0L, pad - ky), y1 = std::min(h, h + pad - ky);
            const long x0 = std::max(0L, pad - kx), x1 = std::min(w, w + pad - kx);
            double s = 0.0;
            for (long y = y0; y < y1; ++y) {
              const double* srow = src + (y + ky - pad) * w + (kx - pad);
              const double* grow = go + y * w;
              for (long x = x0; x < x1; ++x) s += grow[x] * srow[x];
            }
            gw[ky * k + kx] += s;
          }
        }
      }
    }
  }

  void conv_backward_input(const ConvSpec& c, std::span<const double> g_out, std::span<double> g_in) const {
    const long h = static_cast<long>(net_.height_), w = static_cast<long>(net_.width_);
    const long k = static_cast<long>(c.kernel), pad = k / 2;
    const std::size_t hw = net_.height_ * net_.width_;
    std::span<const double> params(net_.params_);
    for (std::size_t co = 0; co < c.out_channels; ++co) {
      const double* go = g_out.data() + co * hw;
      for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
        double* gi = g_in.data() + ci * hw;
        const double* wt = params.data() + c.weight_offset + (co * c.in_channels + ci) * c.kernel * c.kernel;
        for (long ky = 0; ky < k; ++ky) {
          for (long kx = 0; kx < k; ++kx) {
            const double wv = wt[ky * k + kx];
            const long y0 = std::max(0L, pad - ky), y1 = std::min(h, h + pad - ky);
            const long x0 = std::max(0L, pad - kx), x1 = std::min(w, w + pad - kx);
            for (long y = y0; y < y1; ++y) {
              double* girow = gi + (y + ky - pad) * w + (kx - pad);
              const double* grow = go + y * w;
              for (long x = x0; x < x1; ++x) girow[x] += wv * grow[x];
            }
          }
        }
      }
    }
  }

  // 3x3 average pooling, stride 1, padding 1, padded cells excluded from the count.
  void avg_pool(const std::vector<double>& in, std::vector<double>& out) const {
    const std::size_t h = net_.height_, w = net_.width_, hw = h * w;
    for (std::size_t ch = 0; ch < net_.channels_; ++ch) {
      const double* src = in.data() + ch * hw;
      double* dst = out.data() + ch * hw;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          double s = 0.0;
          for (std::size_t yy = (y == 0 ? 0 : y - 1); yy <= std::min(y + 1, h - 1); ++yy)
            for (std::size_t xx = (x == 0 ? 0 : x - 1); xx <= std::min(x + 1, w - 1); ++xx) s += src[yy * w + xx];
          dst[y * w + x] += s * pool_inv_count_[y * w + x];
        }
    }
  }

  void avg_pool_backward(const std::vector<double>& g_out, std::vector<double>& g_in) const {
    const std::size_t h = net_.height_, w = net_.width_, hw = h * w;
    for (std::size_t ch = 0; ch < net_.channels_; ++ch) {
      const double* go = g_out.data() + ch * hw;
      double* gi = g_in.data() + ch * hw;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          const double g = go[y * w + x] * pool_inv_count_[y * w + x];
          for (std::size_t yy = (y == 0 ? 0 : y - 1); yy <= std::min(y + 1, h - 1); ++yy)
            for (std::size_t xx = (x == 0 ? 0 : x - 1); xx <= std::min(x + 1, w - 1); ++xx) gi[yy * w + xx] += g;
        }
    }
  }

  const CompiledNet& net_;
  std::vector<std::vector<std::vector<double>>> sums_;
  std::vector<std::vector<std::vector<double>>> values_;
  std::vector<std::vector<double>> grads_;
  std::vector<double> scratch_;
  std::vector<double> scratch2_;
  std::vector<double> relu_buf_;
  std::vector<double> grelu_buf_;
  std::vector<double> stem_out_;
  std::vector<double> features_;
  std::vector<double> logits_;
  std::vector<double> pool_inv_count_;
};

inline void check_batch(const CompiledNet& net, const ImageBatch& x) {
  if (x.channels != net.in_channels() || x.height != net.input_size() || x.width != net.input_size())
    throw Error(Errc::ShapeMismatch, "batch shape does not match the compiled network");
}

struct ForwardResult {
  Matrix logits;
  ActivationBits bits;
};

/// Logits and ReLU sign bits (bit = 1 iff pre-activation > 0).
inline ForwardResult forward(const CompiledNet& net, const ImageBatch& x) {
  check_batch(net, x);
  ForwardResult r{Matrix(x.n, net.classes()), ActivationBits(x.n, net.relu_neurons())};
  NetEvaluator ev(net);
  for (std::size_t i = 0; i < x.n; ++i) {
    auto logits = ev.forward(x.sample(i), &r.bits, i);
    std::copy(logits.begin(), logits.end(), r.logits.row(i).begin());
  }
  return r;
}

/// B x P matrix; row i is the gradient of sample i's summed logits with
/// respect to every parameter, by exact reverse mode.
inline Matrix jacobian(const CompiledNet& net, const ImageBatch& x) {
  check_batch(net, x);
  if (x.n == 0) throw Error(Errc::ShapeMismatch, "empty batch");
  Matrix j(x.n, net.parameter_count());
  NetEvaluator ev(net);
  const std::vector<double> ones(net.classes(), 1.0);
  for (std::size_t i = 0; i < x.n; ++i) {
    ev.forward(x.sample(i));
    ev.backward(x.sample(i), ones, j.row(i));
  }
  return j;
}

/// Inputs to the final dense classifier (post-pooling features), B x F.
inline Matrix last_layer_features(const CompiledNet& net, const ImageBatch& x) {
  check_batch(net, x);
  Matrix f(x.n, net.feature_dim());
  NetEvaluator ev(net);
  for (std::size_t i = 0; i < x.n; ++i) {
    ev.forward(x.sample(i));
    auto feat = ev.features();
    std::copy(feat.begin(), feat.end(), f.row(i).begin());
  }
  return f;
}

}  // namespace tegnas::netgen
