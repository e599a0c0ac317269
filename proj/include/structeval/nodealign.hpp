#pragma once

// Node correspondences between a hypothesis and a reference tree.
//
// parallel_pairing zips the two pre-order traversals, padding the shorter
// one with placeholders. optimal_alignment matches nodes one-to-one by
// minimum total chrF distance between their canonical subtree strings.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "structeval/hungarian.hpp"
#include "structeval/textmetrics.hpp"
#include "structeval/xmltree.hpp"

namespace structeval {

// A side of a node pair; nullopt is a placeholder.
using NodeRef = std::optional<NodeId>;

struct NodePair {
  NodeRef hyp;
  NodeRef ref;
};

struct NodePairing {
  std::vector<NodePair> pairs;
};

inline NodePairing parallel_pairing(const DocTree& hyp, const DocTree& ref) {
  auto h = hyp.preorder();
  auto r = ref.preorder();
  NodePairing out;
  std::size_t n = std::max(h.size(), r.size());
  out.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.pairs.push_back({i < h.size() ? NodeRef(h[i]) : std::nullopt, i < r.size() ? NodeRef(r[i]) : std::nullopt});
  }
  return out;
}

struct OptimalAlignment {
  std::vector<std::pair<NodeId, NodeId>> matches;  // (hyp, ref), ascending hyp pre-order position
  std::vector<NodeId> unmatched_hyp;
  std::vector<NodeId> unmatched_ref;
  std::size_t tag_mismatches = 0;
  double edit_count = 0.0;
};

// Cost of pairing two nodes: 1 - chrF/100 between their canonical subtree strings.
inline OptimalAlignment optimal_alignment(const DocTree& hyp, const DocTree& ref) {
  auto h = hyp.preorder();
  auto r = ref.preorder();
  const ChrfConfig cfg;
  std::vector<CharNgramProfile> hs, rs;
  hs.reserve(h.size());
  rs.reserve(r.size());
  for (NodeId id : h) hs.emplace_back(serialize_subtree(hyp, id), cfg.max_ngram_order);
  for (NodeId id : r) rs.emplace_back(serialize_subtree(ref, id), cfg.max_ngram_order);

  CostMatrix cost(h.size(), r.size());
  for (std::size_t i = 0; i < h.size(); ++i)
    for (std::size_t j = 0; j < r.size(); ++j) cost(i, j) = 1.0 - chrf(hs[i], rs[j], cfg) / 100.0;

  Assignment a = hungarian(cost);
  OptimalAlignment out;
  std::vector<bool> hyp_used(h.size(), false), ref_used(r.size(), false);
  for (auto [i, j] : a.pairs) {
    hyp_used[i] = ref_used[j] = true;
    out.matches.emplace_back(h[i], r[j]);
    if (hyp.node(h[i]).tag != ref.node(r[j]).tag) ++out.tag_mismatches;
  }
  for (std::size_t i = 0; i < h.size(); ++i)
    if (!hyp_used[i]) out.unmatched_hyp.push_back(h[i]);
  for (std::size_t j = 0; j < r.size(); ++j)
    if (!ref_used[j]) out.unmatched_ref.push_back(r[j]);
  out.edit_count = static_cast<double>(out.unmatched_hyp.size() + out.unmatched_ref.size()) +
                   0.5 * static_cast<double>(out.tag_mismatches);
  return out;
}

}  // namespace structeval
