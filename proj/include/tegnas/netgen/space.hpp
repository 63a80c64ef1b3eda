#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tegnas/error.hpp"

namespace tegnas::netgen {

enum class SpaceKind { Cell201, Graph101, ToyEnum };

enum class OpKind { Zero, Identity, Conv1x1, Conv3x3, AvgPool3x3 };

/// Shape of the network a cell is compiled into: a linear conv3x3 stem, a stack
/// of cells at constant width and resolution, global average pooling and one
/// dense classifier.
struct MacroConfig {
  std::size_t in_channels = 3;
  std::size_t input_size = 8;
  std::size_t stem_channels = 8;
  std::size_t cells = 1;
  std::size_t classes = 10;
  bool conv_bias = false;

  friend bool operator==(const MacroConfig&, const MacroConfig&) = default;
};

struct Edge {
  std::size_t from;
  std::size_t to;
  friend bool operator==(const Edge&, const Edge&) = default;
};

inline OpKind op_kind_from_name(std::string_view name) {
  if (name == "none") return OpKind::Zero;
  if (name == "skip_connect") return OpKind::Identity;
  if (name == "nor_conv_1x1" || name == "conv1x1") return OpKind::Conv1x1;
  if (name == "nor_conv_3x3" || name == "conv3x3") return OpKind::Conv3x3;
  if (name == "avg_pool_3x3" || name == "avgpool3x3") return OpKind::AvgPool3x3;
  throw Error(Errc::UnknownOp, "unknown operator '" + std::string(name) + "'");
}

struct SearchSpace {
  SpaceKind kind = SpaceKind::Cell201;
  std::size_t nodes = 0;
  /// Cell spaces: the operator-labelled edges, ordered by target node then
  /// source node (the NAS-Bench-201 string order). Graph101: every candidate
  /// (i<j) pair in row-major order; presence is an adjacency bit.
  std::vector<Edge> edges;
  std::vector<std::string> op_vocab;
  MacroConfig macro;

  static SearchSpace cell201(MacroConfig macro = {}) {
    return cell_space(SpaceKind::Cell201, 4,
                      {"none", "skip_connect", "nor_conv_1x1", "nor_conv_3x3", "avg_pool_3x3"}, macro);
  }

  /// Three-node cell with three operators: 27 architectures, small enough to
  /// enumerate and train exhaustively.
  static SearchSpace toy_enum(MacroConfig macro = {}) {
    return cell_space(SpaceKind::ToyEnum, 3, {"none", "skip_connect", "nor_conv_3x3"}, macro);
  }

  static SearchSpace graph101(MacroConfig macro = {}) {
    SearchSpace s;
    s.kind = SpaceKind::Graph101;
    s.nodes = 7;
    for (std::size_t i = 0; i < s.nodes; ++i)
      for (std::size_t j = i + 1; j < s.nodes; ++j) s.edges.push_back({i, j});
    s.op_vocab = {"conv1x1", "conv3x3", "avgpool3x3"};
    s.macro = macro;
    return s;
  }

  static SearchSpace from_id(std::string_view id, MacroConfig macro = {}) {
    if (id == "cell201") return cell201(macro);
    if (id == "toy") return toy_enum(macro);
    if (id == "graph101") return graph101(macro);
    throw Error(Errc::ConfigError, "unknown search space '" + std::string(id) + "'");
  }

  std::string id() const {
    switch (kind) {
      case SpaceKind::Cell201: return "cell201";
      case SpaceKind::ToyEnum: return "toy";
      case SpaceKind::Graph101: return "graph101";
    }
    return "?";
  }

  bool is_cell() const noexcept { return kind != SpaceKind::Graph101; }

  OpKind op_kind(std::size_t op) const {
    if (op >= op_vocab.size()) throw Error(Errc::UnknownOp, "operator index out of vocabulary");
    return op_kind_from_name(op_vocab[op]);
  }

  std::size_t op_index(std::string_view name) const {
    for (std::size_t i = 0; i < op_vocab.size(); ++i)
      if (op_vocab[i] == name) return i;
    throw Error(Errc::UnknownOp, "operator '" + std::string(name) + "' not in vocabulary");
  }

  std::size_t graph_interior_vertices() const { return nodes - 2; }

  /// Categorical decision slots an architecture is made of: one per edge for
  /// cell spaces; one binary slot per candidate edge plus one per interior
  /// vertex operator for Graph101.
  std::vector<std::size_t> slot_sizes() const {
    std::vector<std::size_t> sizes;
    if (is_cell()) {
      sizes.assign(edges.size(), op_vocab.size());
    } else {
      sizes.assign(edges.size(), 2);
      sizes.insert(sizes.end(), graph_interior_vertices(), op_vocab.size());
    }
    return sizes;
  }

  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;

 private:
  static SearchSpace cell_space(SpaceKind kind, std::size_t nodes, std::vector<std::string> vocab,
                                MacroConfig macro) {
    SearchSpace s;
    s.kind = kind;
    s.nodes = nodes;
    for (std::size_t j = 1; j < nodes; ++j)
      for (std::size_t i = 0; i < j; ++i) s.edges.push_back({i, j});
    s.op_vocab = std::move(vocab);
    s.macro = macro;
    return s;
  }
};

}  // namespace tegnas::netgen
