#pragma once

// Zhang-Shasha ordered tree edit distance over element tags, and the
// normalized TreeSim reward built on it.

#include <algorithm>
#include <cstddef>
#include <string_view>
#include <vector>

#include "structeval/error.hpp"
#include "structeval/xmltree.hpp"

namespace structeval {

struct EditCostScheme {
  double insert_cost = 1.0;
  double delete_cost = 1.0;
  double relabel_cost = 1.0;
};

inline constexpr double kInvalidTreeSim = -0.1;

namespace detail {

// Post-order view of a tree with 1-based indices, as the recurrences expect.
struct PostorderTree {
  std::vector<const std::string*> label;  // [0] unused
  std::vector<std::size_t> leftmost;      // leftmost leaf descendant
  std::vector<std::size_t> keyroots;

  explicit PostorderTree(const DocTree& t) {
    std::size_t n = t.nodes().size();  // includes the dummy root
    label.assign(n + 1, nullptr);
    leftmost.assign(n + 1, 0);
    std::vector<std::size_t> order_of(n, 0);

    // Iterative post-order: (node, next child index).
    std::vector<std::pair<NodeId, std::size_t>> stack{{DocTree::root(), 0}};
    std::size_t next = 0;
    while (!stack.empty()) {
      auto& [id, ci] = stack.back();
      const auto& ch = t.node(id).children;
      if (ci < ch.size()) {
        NodeId c = ch[ci++];
        stack.emplace_back(c, 0);
        continue;
      }
      std::size_t k = ++next;
      order_of[id] = k;
      label[k] = &t.node(id).tag;
      leftmost[k] = ch.empty() ? k : leftmost[order_of[ch.front()]];
      stack.pop_back();
    }

    // A keyroot is the highest node for each distinct leftmost leaf.
    std::vector<bool> seen(n + 1, false);
    for (std::size_t k = n; k >= 1; --k) {
      if (!seen[leftmost[k]]) {
        seen[leftmost[k]] = true;
        keyroots.push_back(k);
      }
    }
    std::sort(keyroots.begin(), keyroots.end());
  }

  std::size_t size() const { return label.size() - 1; }
};

}  // namespace detail

// Labels are tags; the dummy roots take part with empty labels and so always
// match each other at zero cost.
inline double tree_edit_distance(const DocTree& a, const DocTree& b, const EditCostScheme& costs = {}) {
  detail::PostorderTree ta(a), tb(b);
  std::size_t n = ta.size(), m = tb.size();
  std::vector<double> td((n + 1) * (m + 1), 0.0);
  auto tree = [&](std::size_t i, std::size_t j) -> double& { return td[i * (m + 1) + j]; };
  std::vector<double> fd;

  for (std::size_t i : ta.keyroots) {
    for (std::size_t j : tb.keyroots) {
      std::size_t li = ta.leftmost[i], lj = tb.leftmost[j];
      std::size_t rows = i - li + 2, cols = j - lj + 2;
      fd.assign(rows * cols, 0.0);
      auto forest = [&](std::size_t x, std::size_t y) -> double& { return fd[x * cols + y]; };
      for (std::size_t x = 1; x < rows; ++x) forest(x, 0) = forest(x - 1, 0) + costs.delete_cost;
      for (std::size_t y = 1; y < cols; ++y) forest(0, y) = forest(0, y - 1) + costs.insert_cost;
      for (std::size_t x = 1; x < rows; ++x) {
        std::size_t u = li + x - 1;
        for (std::size_t y = 1; y < cols; ++y) {
          std::size_t v = lj + y - 1;
          double del = forest(x - 1, y) + costs.delete_cost;
          double ins = forest(x, y - 1) + costs.insert_cost;
          if (ta.leftmost[u] == li && tb.leftmost[v] == lj) {
            double rel = forest(x - 1, y - 1) + (*ta.label[u] == *tb.label[v] ? 0.0 : costs.relabel_cost);
            forest(x, y) = std::min({del, ins, rel});
            tree(u, v) = forest(x, y);
          } else {
            std::size_t px = ta.leftmost[u] - li, py = tb.leftmost[v] - lj;
            forest(x, y) = std::min({del, ins, forest(px, py) + tree(u, v)});
          }
        }
      }
    }
  }
  return tree(n, m);
}

inline double tree_sim(const DocTree& hyp, const DocTree& ref) {
  std::size_t denom = std::max(hyp.node_count(), ref.node_count());
  if (denom == 0) return 1.0;
  return 1.0 - tree_edit_distance(hyp, ref) / static_cast<double>(denom);
}

// Unparseable hypotheses score kInvalidTreeSim. Throws InvalidReference.
inline double tree_sim(std::string_view hypothesis_text, std::string_view reference_text) {
  auto ref = parse_document(reference_text);
  if (!ref) throw InvalidReference(ref.reason());
  auto hyp = parse_document(hypothesis_text);
  if (!hyp) return kInvalidTreeSim;
  return tree_sim(hyp.tree(), ref.tree());
}

}  // namespace structeval
