#pragma once

#include <compare>
#include <optional>
#include <string_view>
#include <vector>

namespace lbm {

/// How per-node neighborhoods are combined into an undirected edge set.
enum class Rule { And, Or };

std::string_view rule_name(Rule rule);
Rule parse_rule(std::string_view text);

/// Unordered node pair stored canonically with a < b (0-based).
struct Edge {
  int a = 0;
  int b = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Sorted, duplicate-free set of canonical edges.
class EdgeSet {
 public:
  EdgeSet() = default;
  /// Canonicalizes, sorts and deduplicates. Self-pairs are rejected.
  explicit EdgeSet(std::vector<Edge> edges, std::optional<Rule> rule = std::nullopt);

  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }
  bool contains(int a, int b) const;
  std::optional<Rule> rule() const { return rule_; }

  /// True if every edge of this set is also in `other`.
  bool subset_of(const EdgeSet& other) const;

  bool operator==(const EdgeSet& other) const { return edges_ == other.edges_; }

 private:
  std::vector<Edge> edges_;
  std::optional<Rule> rule_;
};

/// Combines neighborhoods ne_a (0-based node indices) under the AND/OR rule.
/// Throws ParameterError if a node lists itself or an index is out of range.
EdgeSet assemble_edge_set(const std::vector<std::vector<int>>& neighborhoods, Rule rule);

}  // namespace lbm
