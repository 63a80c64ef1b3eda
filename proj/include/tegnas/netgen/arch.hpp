#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tegnas/netgen/space.hpp"
#include "tegnas/numkit/rng.hpp"

namespace tegnas::netgen {

/// One point of a search space, stored as its categorical decision slots (see
/// SearchSpace::slot_sizes). Cell spaces: slot e is the operator on edge e.
/// Graph101: the first |edges| slots are adjacency bits, the rest are the
/// interior vertex operators.
struct Architecture {
  SpaceKind space = SpaceKind::Cell201;
  std::vector<std::size_t> choices;

  std::span<const std::size_t> edge_ops() const { return choices; }

  friend bool operator==(const Architecture&, const Architecture&) = default;
  friend auto operator<=>(const Architecture&, const Architecture&) = default;
};

inline constexpr std::size_t kGraph101MaxEdges = 9;
inline constexpr std::size_t kMaxSamplingAttempts = 1000;

namespace detail {

inline bool adjacent(const Architecture& a, const SearchSpace& s, std::size_t from, std::size_t to) {
  for (std::size_t e = 0; e < s.edges.size(); ++e)
    if (s.edges[e].from == from && s.edges[e].to == to) return a.choices[e] != 0;
  return false;
}

/// Per-node forward reachability from node 0 and backward reachability to the
/// last node over live edges (non-`none` ops, or set adjacency bits).
struct Reach {
  std::vector<bool> from_input;
  std::vector<bool> to_output;
};

inline bool edge_live(const Architecture& a, const SearchSpace& s, std::size_t e) {
  if (s.is_cell()) return s.op_kind(a.choices[e]) != OpKind::Zero;
  return a.choices[e] != 0;
}

inline Reach reachability(const Architecture& a, const SearchSpace& s) {
  Reach r{std::vector<bool>(s.nodes, false), std::vector<bool>(s.nodes, false)};
  r.from_input[0] = true;
  for (std::size_t j = 1; j < s.nodes; ++j)
    for (std::size_t e = 0; e < s.edges.size(); ++e)
      if (s.edges[e].to == j && r.from_input[s.edges[e].from] && edge_live(a, s, e)) r.from_input[j] = true;
  r.to_output[s.nodes - 1] = true;
  for (std::size_t i = s.nodes - 1; i-- > 0;)
    for (std::size_t e = 0; e < s.edges.size(); ++e)
      if (s.edges[e].from == i && r.to_output[s.edges[e].to] && edge_live(a, s, e)) r.to_output[i] = true;
  return r;
}

}  // namespace detail

/// Returns a description of the first violated invariant, or nullopt.
inline std::optional<std::string> arch_violation(const Architecture& a, const SearchSpace& s) {
  if (a.space != s.kind) return "architecture belongs to a different space";
  const auto sizes = s.slot_sizes();
  if (a.choices.size() != sizes.size()) return "wrong number of decision slots";
  for (std::size_t i = 0; i < sizes.size(); ++i)
    if (a.choices[i] >= sizes[i]) return "choice out of range at slot " + std::to_string(i);
  if (s.kind == SpaceKind::Graph101) {
    std::size_t edge_count = 0;
    for (std::size_t e = 0; e < s.edges.size(); ++e) edge_count += a.choices[e];
    if (edge_count > kGraph101MaxEdges) return "more than 9 edges";
    const auto reach = detail::reachability(a, s);
    if (!reach.from_input[s.nodes - 1]) return "output not reachable from input";
    for (std::size_t v = 0; v < s.nodes; ++v)
      if (!reach.from_input[v] || !reach.to_output[v])
        return "vertex " + std::to_string(v) + " is not on an input-output path";
  }
  return std::nullopt;
}

inline bool is_valid(const Architecture& a, const SearchSpace& s) { return !arch_violation(a, s); }

inline void validate(const Architecture& a, const SearchSpace& s) {
  if (auto v = arch_violation(a, s)) throw Error(Errc::InvalidArch, *v);
}

/// Longest input-to-output path, in edges, over live edges; 0 if unreachable.
inline std::size_t cell_depth(const Architecture& a, const SearchSpace& s) {
  constexpr long kUnreached = -1;
  std::vector<long> depth(s.nodes, kUnreached);
  depth[0] = 0;
  for (std::size_t j = 1; j < s.nodes; ++j)
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
      const auto& ed = s.edges[e];
      if (ed.to == j && depth[ed.from] != kUnreached && detail::edge_live(a, s, e))
        depth[j] = std::max(depth[j], depth[ed.from] + 1);
    }
  return depth.back() == kUnreached ? 0 : static_cast<std::size_t>(depth.back());
}

inline std::size_t hamming(const Architecture& a, const Architecture& b) {
  if (a.choices.size() != b.choices.size()) throw Error(Errc::ShapeMismatch, "architectures differ in slot count");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.choices.size(); ++i) d += a.choices[i] != b.choices[i];
  return d;
}

/// Concatenated per-slot one-hot blocks; the degenerate categorical distribution.
inline std::vector<double> one_hot(const Architecture& a, const SearchSpace& s) {
  std::vector<double> out;
  const auto sizes = s.slot_sizes();
  for (std::size_t i = 0; i < sizes.size(); ++i)
    for (std::size_t k = 0; k < sizes[i]; ++k) out.push_back(a.choices[i] == k ? 1.0 : 0.0);
  return out;
}

inline std::size_t space_size(const SearchSpace& s) {
  std::size_t n = 1;
  for (auto k : s.slot_sizes()) n *= k;
  return n;
}

/// All valid architectures in odometer order (last slot fastest). Only sensible
/// for small spaces.
inline std::vector<Architecture> enumerate(const SearchSpace& s) {
  const auto sizes = s.slot_sizes();
  std::vector<Architecture> out;
  Architecture a{s.kind, std::vector<std::size_t>(sizes.size(), 0)};
  while (true) {
    if (is_valid(a, s)) out.push_back(a);
    std::size_t i = sizes.size();
    while (i > 0) {
      --i;
      if (++a.choices[i] < sizes[i]) break;
      a.choices[i] = 0;
      if (i == 0) return out;
    }
    if (sizes.empty()) return out;
  }
}

namespace detail {

/// All valid Graph101 adjacency patterns as bitmasks over the candidate edges.
/// Only about 0.2% of uniform bit patterns are valid, so drawing from this list
/// replaces rejection sampling while staying uniform over valid graphs.
inline const std::vector<std::uint32_t>& graph101_adjacency(const SearchSpace& s) {
  static const std::vector<std::uint32_t> table = [&] {
    std::vector<std::uint32_t> out;
    const std::size_t n = s.edges.size();
    Architecture a{SpaceKind::Graph101, std::vector<std::size_t>(s.slot_sizes().size(), 0)};
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) > kGraph101MaxEdges) continue;
      for (std::size_t e = 0; e < n; ++e) a.choices[e] = (mask >> e) & 1u;
      if (is_valid(a, s)) out.push_back(mask);
    }
    return out;
  }();
  return table;
}

}  // namespace detail

/// Uniform over valid architectures of the space.
inline Architecture random_arch(const SearchSpace& s, numkit::Rng& rng) {
  const auto sizes = s.slot_sizes();
  if (s.kind == SpaceKind::Graph101) {
    const auto& table = detail::graph101_adjacency(s);
    Architecture a{s.kind, std::vector<std::size_t>(sizes.size())};
    const std::uint32_t mask = table[rng.index(table.size())];
    for (std::size_t i = 0; i < sizes.size(); ++i)
      a.choices[i] = i < s.edges.size() ? (mask >> i) & 1u : rng.index(sizes[i]);
    return a;
  }
  for (std::size_t attempt = 0; attempt < kMaxSamplingAttempts; ++attempt) {
    Architecture a{s.kind, std::vector<std::size_t>(sizes.size())};
    for (std::size_t i = 0; i < sizes.size(); ++i) a.choices[i] = rng.index(sizes[i]);
    if (is_valid(a, s)) return a;
  }
  throw Error(Errc::SamplingExhausted, "no valid architecture after 1000 draws");
}

/// Resamples one uniformly chosen slot to a different value (uniform over the
/// remaining values); Graph101 results are revalidated and redrawn.
inline Architecture mutate(const Architecture& a, const SearchSpace& s, numkit::Rng& rng) {
  validate(a, s);
  const auto sizes = s.slot_sizes();
  for (std::size_t attempt = 0; attempt < kMaxSamplingAttempts; ++attempt) {
    Architecture child = a;
    const std::size_t slot = rng.index(sizes.size());
    const std::size_t shift = 1 + rng.index(sizes[slot] - 1);
    child.choices[slot] = (a.choices[slot] + shift) % sizes[slot];
    if (is_valid(child, s)) return child;
  }
  throw Error(Errc::SamplingExhausted, "no valid mutation after 1000 draws");
}

// ---------------------------------------------------------------------------
// Text encodings.
//   cell spaces: |op~0|+|op~0|op~1|+|op~0|op~1|op~2|
//   Graph101:    28 upper-triangle bits (row-major, diagonal included) then
//                the five interior vertex operators, ':'-separated.

inline std::string arch_to_string(const Architecture& a, const SearchSpace& s) {
  validate(a, s);
  std::string out;
  if (s.is_cell()) {
    std::size_t e = 0;
    for (std::size_t j = 1; j < s.nodes; ++j) {
      if (j > 1) out += '+';
      out += '|';
      for (std::size_t i = 0; i < j; ++i, ++e) {
        out += s.op_vocab[a.choices[e]];
        out += '~';
        out += std::to_string(i);
        out += '|';
      }
    }
    return out;
  }
  for (std::size_t i = 0; i < s.nodes; ++i)
    for (std::size_t j = i; j < s.nodes; ++j) out += detail::adjacent(a, s, i, j) ? '1' : '0';
  for (std::size_t v = 0; v < s.graph_interior_vertices(); ++v) {
    out += ':';
    out += s.op_vocab[a.choices[s.edges.size() + v]];
  }
  return out;
}

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& what, std::size_t pos) {
  throw Error(Errc::ParseError, what + " at offset " + std::to_string(pos), pos);
}

inline Architecture parse_cell(std::string_view text, const SearchSpace& s) {
  struct Token {
    std::string_view name;
    std::size_t offset;
  };
  std::vector<Token> tokens;
  std::size_t pos = 0;
  auto expect = [&](char c) {
    if (pos >= text.size() || text[pos] != c) parse_fail(std::string("expected '") + c + "'", pos);
    ++pos;
  };
  for (std::size_t j = 1; j < s.nodes; ++j) {
    if (j > 1) expect('+');
    expect('|');
    for (std::size_t i = 0; i < j; ++i) {
      const std::size_t start = pos;
      while (pos < text.size() && text[pos] != '~' && text[pos] != '|' && text[pos] != '+') ++pos;
      if (pos == start) parse_fail("expected operator name", pos);
      tokens.push_back({text.substr(start, pos - start), start});
      expect('~');
      const std::size_t digits = pos;
      std::size_t value = 0;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') value = value * 10 + (text[pos++] - '0');
      if (pos == digits) parse_fail("expected source index", pos);
      if (value != i) parse_fail("source index out of order", digits);
      expect('|');
    }
  }
  if (pos != text.size()) parse_fail("trailing characters", pos);

  Architecture a{s.kind, {}};
  for (const auto& t : tokens) {
    auto it = std::find(s.op_vocab.begin(), s.op_vocab.end(), t.name);
    if (it == s.op_vocab.end()) parse_fail("unknown operator '" + std::string(t.name) + "'", t.offset);
    a.choices.push_back(static_cast<std::size_t>(it - s.op_vocab.begin()));
  }
  return a;
}

inline Architecture parse_graph(std::string_view text, const SearchSpace& s) {
  const std::size_t bits = s.nodes * (s.nodes + 1) / 2;
  if (text.size() < bits) parse_fail("expected " + std::to_string(bits) + " adjacency bits", text.size());
  Architecture a{s.kind, std::vector<std::size_t>(s.edges.size(), 0)};
  std::size_t pos = 0;
  for (std::size_t i = 0; i < s.nodes; ++i) {
    for (std::size_t j = i; j < s.nodes; ++j, ++pos) {
      const char c = text[pos];
      if (c != '0' && c != '1') parse_fail("expected adjacency bit", pos);
      if (c == '1') {
        if (i == j) parse_fail("self loop on the diagonal", pos);
        for (std::size_t e = 0; e < s.edges.size(); ++e)
          if (s.edges[e].from == i && s.edges[e].to == j) a.choices[e] = 1;
      }
    }
  }
  for (std::size_t v = 0; v < s.graph_interior_vertices(); ++v) {
    if (pos >= text.size() || text[pos] != ':') parse_fail("expected ':'", pos);
    ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] != ':') ++pos;
    const auto name = text.substr(start, pos - start);
    auto it = std::find(s.op_vocab.begin(), s.op_vocab.end(), name);
    if (it == s.op_vocab.end()) parse_fail("unknown operator '" + std::string(name) + "'", start);
    a.choices.push_back(static_cast<std::size_t>(it - s.op_vocab.begin()));
  }
  if (pos != text.size()) parse_fail("trailing characters", pos);
  return a;
}

}  // namespace detail

/// Parses the space's text encoding. Structural problems raise ParseError
/// with the byte offset; a well-formed string describing an invalid graph
/// raises InvalidArch.
inline Architecture arch_from_string(std::string_view text, const SearchSpace& s) {
  Architecture a = s.is_cell() ? detail::parse_cell(text, s) : detail::parse_graph(text, s);
  validate(a, s);
  return a;
}

}  // namespace tegnas::netgen
