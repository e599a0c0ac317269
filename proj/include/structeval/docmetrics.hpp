#pragma once

// Document and corpus metrics for structured translation output.
//
// Every per-document score lives on 0..100 (TreeSim on 0..1, binary metrics
// as 0/1). Corpus aggregates are computed from per-document records so any
// subset of documents, e.g. a bootstrap resample, can be re-aggregated
// without re-parsing.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "structeval/error.hpp"
#include "structeval/nodealign.hpp"
#include "structeval/textmetrics.hpp"
#include "structeval/treedist.hpp"
#include "structeval/xmltree.hpp"

namespace structeval {

// Node-chrF over positional pairs. Tag-mismatched and placeholder pairs
// score 0; pairs with matching tags and no text on either side are skipped.
inline double node_chrf(const DocTree& hyp, const DocTree& ref, const ChrfConfig& cfg = {}) {
  double sum = 0.0;
  std::size_t scored = 0;
  for (const auto& [h, r] : parallel_pairing(hyp, ref).pairs) {
    if (!h || !r) {
      ++scored;
      continue;
    }
    const TreeNode& a = hyp.node(*h);
    const TreeNode& b = ref.node(*r);
    if (a.tag != b.tag) {
      ++scored;
      continue;
    }
    if (text::is_blank(a.direct_text) && text::is_blank(b.direct_text)) continue;
    sum += chrf(a.direct_text, b.direct_text, cfg);
    ++scored;
  }
  return scored == 0 ? 100.0 : sum / static_cast<double>(scored);
}

// Node-chrF under an optimal alignment; unmatched nodes score 0.
inline double optimal_node_chrf(const OptimalAlignment& al, const DocTree& hyp, const DocTree& ref,
                                const ChrfConfig& cfg = {}) {
  double sum = 0.0;
  std::size_t scored = al.unmatched_hyp.size() + al.unmatched_ref.size();
  for (auto [h, r] : al.matches) {
    const TreeNode& a = hyp.node(h);
    const TreeNode& b = ref.node(r);
    if (a.tag != b.tag) {
      ++scored;
      continue;
    }
    if (text::is_blank(a.direct_text) && text::is_blank(b.direct_text)) continue;
    sum += chrf(a.direct_text, b.direct_text, cfg);
    ++scored;
  }
  return scored == 0 ? 100.0 : sum / static_cast<double>(scored);
}

inline double xml_match(const ParseOutcome& hyp, const DocTree& ref, bool compare_attributes = true) {
  return hyp.ok() && is_isomorphic(hyp.tree(), ref, compare_attributes) ? 1.0 : 0.0;
}

// Segment pairs contributed by one document to XML-BLEU.
inline std::vector<std::pair<std::string, std::string>> xml_bleu_pairs(const ParseOutcome& hyp, const DocTree& ref,
                                                                       bool compare_attributes = true) {
  std::vector<std::pair<std::string, std::string>> out;
  auto rs = text_segments(ref);
  if (xml_match(hyp, ref, compare_attributes) == 1.0) {
    auto hs = text_segments(hyp.tree());
    std::size_t n = std::max(hs.size(), rs.size());
    for (std::size_t i = 0; i < n; ++i)
      out.emplace_back(i < hs.size() ? hs[i] : std::string(), i < rs.size() ? rs[i] : std::string());
  } else {
    for (auto& r : rs) out.emplace_back(std::string(), std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// StrucAUC

struct StrucAucDoc {
  enum class Kind { skipped, invalid_hypothesis, scored };
  Kind kind = Kind::scored;
  double s_unaligned = 0.0;  // 0..100
  double s_optimal = 0.0;    // 0..100
  double edits = 0.0;
};

struct StrucAucResult {
  double score = 0.0;                              // 0..100
  std::vector<std::pair<double, double>> curve;    // (threshold k, mean score 0..100)
};

// Thresholds 0, 0.5, 1, ..., K; K itself is appended when off the grid.
inline std::vector<double> strucauc_thresholds(double K) {
  std::vector<double> ks;
  for (int j = 0; 0.5 * j <= K + 1e-12; ++j) ks.push_back(0.5 * j);
  if (K - ks.back() > 1e-12) ks.push_back(K);
  return ks;
}

inline StrucAucResult strucauc_from_docs(std::span<const StrucAucDoc> docs, double K) {
  if (!(K > 0.0)) throw ConfigError("StrucAUC K must be positive");
  auto ks = strucauc_thresholds(K);
  std::vector<double> sums(ks.size(), 0.0);
  std::size_t n = 0;
  for (const auto& d : docs) {
    if (d.kind == StrucAucDoc::Kind::skipped) continue;
    ++n;
    if (d.kind == StrucAucDoc::Kind::invalid_hypothesis) continue;
    sums[0] += d.s_unaligned;
    for (std::size_t t = 1; t < ks.size(); ++t) sums[t] += d.edits <= ks[t] ? d.s_optimal : d.s_unaligned;
  }
  if (n == 0) throw EmptyCorpus("StrucAUC needs at least one document with a valid reference");

  StrucAucResult out;
  double area = 0.0;
  for (std::size_t t = 0; t < ks.size(); ++t) {
    double mean = sums[t] / static_cast<double>(n) / 100.0;
    out.curve.emplace_back(ks[t], mean * 100.0);
    if (t > 0) {
      double prev = out.curve[t - 1].second / 100.0;
      area += (ks[t] - ks[t - 1]) / K * (prev + mean) / 2.0;
    }
  }
  out.score = area * 100.0;
  return out;
}

// ---------------------------------------------------------------------------
// Per-document scoring

enum class DocStatus { scored, ref_invalid, hyp_invalid };

inline const char* to_string(DocStatus s) {
  switch (s) {
    case DocStatus::scored: return "scored";
    case DocStatus::ref_invalid: return "ref_invalid";
    case DocStatus::hyp_invalid: return "hyp_invalid";
  }
  return "?";
}

struct EvalConfig {
  double strucauc_k = 5.0;
  BleuConfig bleu{};
  ChrfConfig chrf{};
  bool compare_attributes = true;  // XML-Match and XML-BLEU pairing
  unsigned threads = 1;
};

struct DocScores {
  DocStatus status = DocStatus::scored;
  std::string reason;  // parse failure, when not scored
  double xml_validity = 0.0;
  double xml_match = 0.0;
  double tree_sim = 0.0;
  double node_chrf = 0.0;
  double optimal_node_chrf = 0.0;
  std::optional<double> edit_count;
  BleuStats content_bleu;
  BleuStats xml_bleu;

  StrucAucDoc strucauc() const {
    switch (status) {
      case DocStatus::ref_invalid: return {StrucAucDoc::Kind::skipped};
      case DocStatus::hyp_invalid: return {StrucAucDoc::Kind::invalid_hypothesis};
      case DocStatus::scored: break;
    }
    return {StrucAucDoc::Kind::scored, node_chrf, optimal_node_chrf, edit_count.value_or(0.0)};
  }
};

inline DocScores score_document(std::string_view hypothesis, std::string_view reference, const EvalConfig& cfg = {}) {
  DocScores s;
  s.content_bleu = BleuStats(cfg.bleu.max_ngram_order);
  s.xml_bleu = BleuStats(cfg.bleu.max_ngram_order);
  auto ref = parse_document(reference);
  if (!ref) {
    s.status = DocStatus::ref_invalid;
    s.reason = ref.reason();
    return s;
  }
  auto hyp = parse_document(hypothesis);
  s.content_bleu = bleu_stats(strip_markup(hypothesis), strip_markup(reference), cfg.bleu);
  for (const auto& [h, r] : xml_bleu_pairs(hyp, ref.tree(), cfg.compare_attributes))
    s.xml_bleu += bleu_stats(h, r, cfg.bleu);
  if (!hyp) {
    s.status = DocStatus::hyp_invalid;
    s.reason = hyp.reason();
    s.tree_sim = kInvalidTreeSim;
    return s;
  }
  const DocTree& h = hyp.tree();
  const DocTree& r = ref.tree();
  s.xml_validity = 1.0;
  s.xml_match = xml_match(hyp, r, cfg.compare_attributes);
  s.tree_sim = tree_sim(h, r);
  s.node_chrf = node_chrf(h, r, cfg.chrf);
  auto al = optimal_alignment(h, r);
  s.optimal_node_chrf = optimal_node_chrf(al, h, r, cfg.chrf);
  s.edit_count = al.edit_count;
  return s;
}

// ---------------------------------------------------------------------------
// Corpus aggregation

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"content_bleu", "xml_validity", "xml_match", "xml_bleu",
                                              "strucauc",     "treesim",      "node_chrf", "optimal_node_chrf"};
  return names;
}

inline bool is_metric_name(std::string_view name) {
  const auto& v = metric_names();
  return std::find(v.begin(), v.end(), name) != v.end();
}

struct CorpusAggregates {
  std::size_t documents = 0;  // rows that count (reference valid)
  std::map<std::string, double> values;  // metric name -> corpus value
  std::vector<std::pair<double, double>> strucauc_curve;
  double mean_edit_count = 0.0;
};

// Aggregates the documents selected by `indices` (repeats allowed).
inline CorpusAggregates aggregate(std::span<const DocScores> docs, std::span<const std::size_t> indices,
                                  const EvalConfig& cfg = {}) {
  CorpusAggregates out;
  BleuStats content(cfg.bleu.max_ngram_order), xml(cfg.bleu.max_ngram_order);
  double validity = 0, match = 0, tsim = 0, nchrf = 0, onchrf = 0, edits = 0;
  std::size_t edit_rows = 0;
  std::vector<StrucAucDoc> auc;
  auc.reserve(indices.size());
  for (std::size_t i : indices) {
    const DocScores& d = docs[i];
    auc.push_back(d.strucauc());
    if (d.status == DocStatus::ref_invalid) continue;
    ++out.documents;
    content += d.content_bleu;
    xml += d.xml_bleu;
    validity += d.xml_validity;
    match += d.xml_match;
    tsim += d.tree_sim;
    nchrf += d.node_chrf;
    onchrf += d.optimal_node_chrf;
    if (d.edit_count) {
      edits += *d.edit_count;
      ++edit_rows;
    }
  }
  if (out.documents == 0) throw EmptyCorpus("no document has a valid reference");
  auto n = static_cast<double>(out.documents);
  auto sr = strucauc_from_docs(auc, cfg.strucauc_k);
  out.values = {
      {"content_bleu", bleu_from_stats(content, cfg.bleu)},
      {"xml_validity", 100.0 * validity / n},
      {"xml_match", 100.0 * match / n},
      {"xml_bleu", bleu_from_stats(xml, cfg.bleu)},
      {"strucauc", sr.score},
      {"treesim", 100.0 * tsim / n},
      {"node_chrf", nchrf / n},
      {"optimal_node_chrf", onchrf / n},
  };
  out.strucauc_curve = std::move(sr.curve);
  out.mean_edit_count = edit_rows ? edits / static_cast<double>(edit_rows) : 0.0;
  return out;
}

inline CorpusAggregates aggregate(std::span<const DocScores> docs, const EvalConfig& cfg = {}) {
  std::vector<std::size_t> all(docs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return aggregate(docs, all, cfg);
}

struct CorpusReport {
  std::vector<std::string> ids;
  std::vector<DocScores> per_doc;
  std::vector<std::string> metrics;  // requested, in canonical order
  CorpusAggregates totals;
  double strucauc_k = 5.0;
};

// Scores each pair on a bounded worker pool; results land in input order.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

struct DocumentPair {
  std::string id;
  std::string hypothesis;
  std::string reference;
};

// Throws EmptyCorpus, ConfigError (unknown metric name).
inline CorpusReport evaluate_corpus(std::span<const DocumentPair> corpus, std::span<const std::string> metric_set,
                                    const EvalConfig& cfg = {}) {
  if (corpus.empty()) throw EmptyCorpus();
  CorpusReport rep;
  rep.strucauc_k = cfg.strucauc_k;
  for (const auto& m : metric_set) {
    if (!is_metric_name(m)) {
      std::string valid;
      for (const auto& v : metric_names()) valid += (valid.empty() ? "" : ", ") + v;
      throw ConfigError("unknown metric '" + m + "' (valid: " + valid + ")");
    }
  }
  for (const auto& m : metric_names())
    if (metric_set.empty() || std::find(metric_set.begin(), metric_set.end(), m) != metric_set.end())
      rep.metrics.push_back(m);

  rep.per_doc.resize(corpus.size());
  parallel_for(corpus.size(), cfg.threads, [&](std::size_t i) {
    rep.per_doc[i] = score_document(corpus[i].hypothesis, corpus[i].reference, cfg);
  });
  for (const auto& d : corpus) rep.ids.push_back(d.id);
  rep.totals = aggregate(rep.per_doc, cfg);
  return rep;
}

// Convenience wrappers over raw (hypothesis, reference) text pairs.

inline StrucAucResult strucauc(std::span<const std::pair<std::string, std::string>> corpus, double K = 5.0) {
  if (corpus.empty()) throw EmptyCorpus();
  EvalConfig cfg;
  cfg.strucauc_k = K;
  std::vector<StrucAucDoc> docs;
  for (const auto& [h, r] : corpus) docs.push_back(score_document(h, r, cfg).strucauc());
  return strucauc_from_docs(docs, K);
}

inline double xml_bleu(std::span<const std::pair<std::string, std::string>> corpus, const BleuConfig& bcfg = {},
                       bool compare_attributes = true) {
  if (corpus.empty()) throw EmptyCorpus();
  BleuStats total(bcfg.max_ngram_order);
  for (const auto& [h, r] : corpus) {
    auto ref = parse_document(r);
    if (!ref) throw InvalidReference(ref.reason());
    for (const auto& [hs, rs] : xml_bleu_pairs(parse_document(h), ref.tree(), compare_attributes))
      total += bleu_stats(hs, rs, bcfg);
  }
  return bleu_from_stats(total, bcfg);
}

inline double content_bleu(std::span<const std::pair<std::string, std::string>> corpus, const BleuConfig& bcfg = {}) {
  if (corpus.empty()) throw EmptyCorpus();
  BleuStats total(bcfg.max_ngram_order);
  for (const auto& [h, r] : corpus) total += bleu_stats(strip_markup(h), strip_markup(r), bcfg);
  return bleu_from_stats(total, bcfg);
}

}  // namespace structeval
