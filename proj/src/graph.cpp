#include "lbmgraph/graph.hpp"

#include "lbmgraph/common.hpp"

#include <algorithm>
#include <string>

namespace lbm {

std::string_view rule_name(Rule rule) { return rule == Rule::And ? "AND" : "OR"; }

Rule parse_rule(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
  if (t == "AND") return Rule::And;
  if (t == "OR") return Rule::Or;
  throw ParameterError("unknown rule '" + std::string(text) + "' (expected AND or OR)");
}

EdgeSet::EdgeSet(std::vector<Edge> edges, std::optional<Rule> rule) : rule_(rule) {
  for (Edge& e : edges) {
    if (e.a == e.b) throw ParameterError("edge set contains a self-pair");
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
}

bool EdgeSet::contains(int a, int b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{a, b});
}

bool EdgeSet::subset_of(const EdgeSet& other) const {
  return std::includes(other.edges_.begin(), other.edges_.end(), edges_.begin(), edges_.end());
}

EdgeSet assemble_edge_set(const std::vector<std::vector<int>>& neighborhoods, Rule rule) {
  const int K = static_cast<int>(neighborhoods.size());
  // selected(a, b): b in ne_a
  std::vector<char> selected(static_cast<std::size_t>(K) * K, 0);
  for (int a = 0; a < K; ++a) {
    for (int b : neighborhoods[a]) {
      if (b == a) throw ParameterError("node " + std::to_string(a + 1) + " lists itself as a neighbor");
      if (b < 0 || b >= K) throw ParameterError("neighbor index out of range");
      selected[static_cast<std::size_t>(a) * K + b] = 1;
    }
  }
  std::vector<Edge> edges;
  for (int a = 0; a < K; ++a) {
    for (int b = a + 1; b < K; ++b) {
      const bool ab = selected[static_cast<std::size_t>(a) * K + b];
      const bool ba = selected[static_cast<std::size_t>(b) * K + a];
      if (rule == Rule::And ? (ab && ba) : (ab || ba)) edges.push_back({a, b});
    }
  }
  return EdgeSet(std::move(edges), rule);
}

}  // namespace lbm
