#pragma once

// Character n-gram F-score (chrF) and corpus BLEU.
//
// Both scores are reported on 0..100. Character n-grams run over Unicode
// code points with all whitespace removed. BLEU keeps sufficient statistics
// separable so corpus scores can be recomputed from any document subset.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "structeval/error.hpp"
#include "structeval/text.hpp"

namespace structeval {

struct ChrfConfig {
  int max_ngram_order = 6;
  double beta = 2.0;
};

enum class Smoothing { exp, none };
enum class Tokenizer { whitespace, character };

struct BleuConfig {
  int max_ngram_order = 4;
  Smoothing smoothing = Smoothing::exp;
  Tokenizer tokenizer = Tokenizer::whitespace;
};

namespace detail {

using NgramCounts = std::unordered_map<std::string, std::int64_t>;

template <typename Token>
NgramCounts count_ngrams(const std::vector<Token>& tokens, std::size_t n, std::string_view sep) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  std::string key;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    key.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j) key += sep;
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

inline std::int64_t clipped_matches(const NgramCounts& hyp, const NgramCounts& ref) {
  std::int64_t m = 0;
  for (const auto& [g, c] : hyp) {
    auto it = ref.find(g);
    if (it != ref.end()) m += std::min(c, it->second);
  }
  return m;
}

inline std::vector<std::string_view> chrf_chars(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto cp : text::code_points(s))
    if (!(cp.size() == 1 && text::is_space(cp[0]))) out.push_back(cp);
  return out;
}

}  // namespace detail

// Character n-gram counts of one string, reusable across many comparisons.
struct CharNgramProfile {
  std::size_t length = 0;  // code points, whitespace excluded
  std::vector<detail::NgramCounts> orders;

  CharNgramProfile() = default;
  CharNgramProfile(std::string_view s, int max_order) {
    auto chars = detail::chrf_chars(s);
    length = chars.size();
    for (int n = 1; n <= max_order && static_cast<std::size_t>(n) <= length; ++n)
      orders.push_back(detail::count_ngrams(chars, static_cast<std::size_t>(n), ""));
  }
};

// Precision and recall are averaged over the orders that both sides can
// realize (at least one n-gram each), then combined into F-beta.
inline double chrf(const CharNgramProfile& hyp, const CharNgramProfile& ref, const ChrfConfig& cfg = {}) {
  if (hyp.length == 0 && ref.length == 0) return 100.0;
  if (hyp.length == 0 || ref.length == 0) return 0.0;

  double prec_sum = 0.0, rec_sum = 0.0;
  std::size_t orders = std::min({hyp.orders.size(), ref.orders.size(), static_cast<std::size_t>(cfg.max_ngram_order)});
  for (std::size_t k = 0; k < orders; ++k) {
    const auto& hc = hyp.orders[k];
    const auto& rc = ref.orders[k];
    auto m = static_cast<double>(hc.size() <= rc.size() ? detail::clipped_matches(hc, rc)
                                                        : detail::clipped_matches(rc, hc));
    prec_sum += m / static_cast<double>(hyp.length - k);
    rec_sum += m / static_cast<double>(ref.length - k);
  }
  double p = prec_sum / static_cast<double>(orders);
  double r = rec_sum / static_cast<double>(orders);
  if (p + r <= 0.0) return 0.0;
  double b2 = cfg.beta * cfg.beta;
  return 100.0 * (1.0 + b2) * p * r / (b2 * p + r);
}

inline double chrf(std::string_view hypothesis, std::string_view reference, const ChrfConfig& cfg = {}) {
  return chrf(CharNgramProfile(hypothesis, cfg.max_ngram_order), CharNgramProfile(reference, cfg.max_ngram_order), cfg);
}

inline std::vector<std::string> tokenize(std::string_view s, Tokenizer tok) {
  if (tok == Tokenizer::whitespace) return text::split_whitespace(s);
  std::vector<std::string> out;
  for (auto cp : detail::chrf_chars(s)) out.emplace_back(cp);
  return out;
}

// Sufficient statistics for corpus BLEU; summable across segments.
struct BleuStats {
  std::vector<std::int64_t> matches;
  std::vector<std::int64_t> totals;
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;

  explicit BleuStats(int order = 4) : matches(static_cast<std::size_t>(order)), totals(static_cast<std::size_t>(order)) {}

  BleuStats& operator+=(const BleuStats& o) {
    for (std::size_t i = 0; i < matches.size() && i < o.matches.size(); ++i) {
      matches[i] += o.matches[i];
      totals[i] += o.totals[i];
    }
    hyp_len += o.hyp_len;
    ref_len += o.ref_len;
    return *this;
  }
};

inline BleuStats bleu_stats(std::string_view hypothesis, std::string_view reference, const BleuConfig& cfg = {}) {
  BleuStats st(cfg.max_ngram_order);
  auto hyp = tokenize(hypothesis, cfg.tokenizer);
  auto ref = tokenize(reference, cfg.tokenizer);
  st.hyp_len = static_cast<std::int64_t>(hyp.size());
  st.ref_len = static_cast<std::int64_t>(ref.size());
  for (int n = 1; n <= cfg.max_ngram_order; ++n) {
    auto nn = static_cast<std::size_t>(n);
    auto hc = detail::count_ngrams(hyp, nn, " ");
    auto rc = detail::count_ngrams(ref, nn, " ");
    st.matches[nn - 1] = detail::clipped_matches(hc, rc);
    st.totals[nn - 1] = hyp.size() >= nn ? static_cast<std::int64_t>(hyp.size() - nn + 1) : 0;
  }
  return st;
}

// Geometric mean over orders with at least one hypothesis n-gram; the k-th
// zero-match order gets precision 1 / (2^k * total) under exp smoothing.
inline double bleu_from_stats(const BleuStats& st, const BleuConfig& cfg = {}) {
  if (st.hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  double smooth = 1.0;
  for (std::size_t n = 0; n < st.totals.size(); ++n) {
    if (st.totals[n] == 0) break;
    double p;
    if (st.matches[n] == 0) {
      if (cfg.smoothing == Smoothing::none) return 0.0;
      smooth *= 2.0;
      p = 1.0 / (smooth * static_cast<double>(st.totals[n]));
    } else {
      p = static_cast<double>(st.matches[n]) / static_cast<double>(st.totals[n]);
    }
    log_sum += std::log(p);
    ++orders;
  }
  double bp = 1.0;
  if (st.hyp_len < st.ref_len) bp = std::exp(1.0 - static_cast<double>(st.ref_len) / static_cast<double>(st.hyp_len));
  return 100.0 * bp * std::exp(log_sum / orders);
}

template <typename Pairs>
double corpus_bleu(const Pairs& pairs, const BleuConfig& cfg = {}) {
  if (std::begin(pairs) == std::end(pairs)) throw EmptyCorpus("corpus_bleu needs at least one segment pair");
  BleuStats total(cfg.max_ngram_order);
  for (const auto& [h, r] : pairs) total += bleu_stats(h, r, cfg);
  return bleu_from_stats(total, cfg);
}

}  // namespace structeval
