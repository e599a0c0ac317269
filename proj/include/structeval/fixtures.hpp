#pragma once

// Seeded synthetic corpora with known corruptions.
//
// References are random element trees shaped like technical documentation
// (log-normal node counts around a median of 18, bounded depth, a small tag
// vocabulary, short text in most nodes). Hypotheses are copies of the
// reference with corruption operators applied; each record lists what was
// applied so tests can check metrics against ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "structeval/corpusio.hpp"
#include "structeval/stats.hpp"

namespace structeval {

struct CorruptionRates {
  double drop_node = 0.0;
  double relabel_tag = 0.0;
  double swap_siblings = 0.0;
  double break_wellformedness = 0.0;
  double perturb_text = 0.0;
};

struct FixtureSpec {
  std::size_t doc_count = 10;
  double node_mean = 27.36;
  double node_median = 18.0;
  std::size_t min_nodes = 1;
  std::size_t max_nodes = 120;
  std::size_t max_depth = 7;
  std::size_t tag_vocabulary = 58;
  double text_probability = 0.7;
  double attribute_probability = 0.15;
  CorruptionRates rates{};
  std::size_t relabels = 1;  // relabel operations per document when relabel_tag fires

  void validate() const {
    auto in01 = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!in01(rates.drop_node) || !in01(rates.relabel_tag) || !in01(rates.swap_siblings) ||
        !in01(rates.break_wellformedness) || !in01(rates.perturb_text) || !in01(text_probability) ||
        !in01(attribute_probability))
      throw ConfigError("fixture rates must lie in [0, 1]");
    if (min_nodes < 1 || max_nodes < min_nodes) throw ConfigError("bad node count bounds");
    if (max_depth < 1) throw ConfigError("max depth must be at least 1");
    if (tag_vocabulary < 2 || tag_vocabulary > 58) throw ConfigError("tag vocabulary must be in [2, 58]");
    if (!(node_median > 0.0) || node_mean < node_median) throw ConfigError("node mean must be >= median > 0");
  }
};

struct FixtureRecord {
  CorpusRecord record;
  std::map<std::string, std::size_t> corruptions;  // operator -> times applied
  std::size_t reference_nodes = 0;

  bool structurally_corrupted() const {
    for (const auto& [op, n] : corruptions)
      if (op != "perturb-text" && n > 0) return true;
    return false;
  }
};

namespace detail {

inline const std::vector<std::string>& fixture_tags() {
  static const std::vector<std::string> tags{
      "concept", "title",    "conbody",   "p",          "section",  "ul",         "li",       "ol",
      "note",    "b",        "i",         "codeph",     "xref",     "table",      "tgroup",   "thead",
      "tbody",   "row",      "entry",     "fig",        "image",    "prolog",     "metadata", "keywords",
      "shortdesc", "task",   "taskbody",  "steps",      "step",     "cmd",        "info",     "stepresult",
      "context", "result",   "example",   "dl",         "dlentry",  "dt",         "dd",       "ph",
      "uicontrol", "menucascade", "filepath", "userinput", "systemoutput", "sl", "sli",      "simpletable",
      "sthead",  "strow",    "stentry",   "lines",      "pre",      "codeblock",  "q",        "term",
      "indexterm", "colspec"};
  return tags;
}

inline const std::vector<std::string>& fixture_words() {
  static const std::vector<std::string> words = [] {
    const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
    const char* nuclei[] = {"a", "e", "i", "o", "u", "ai", "ou"};
    std::vector<std::string> w;
    for (const char* a : onsets)
      for (const char* b : nuclei)
        for (const char* c : {"n", "r", "s", "x"}) w.push_back(std::string(a) + b + c);
    return w;
  }();
  return words;
}

struct GenNode {
  std::string tag;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;
  std::vector<GenNode> children;
};

inline void render(const GenNode& n, std::string& out) {
  out += '<';
  out += n.tag;
  for (const auto& [k, v] : n.attributes) {
    out += ' ';
    out += k;
    out += "=\"";
    escape_into(out, v, true);
    out += '"';
  }
  out += '>';
  escape_into(out, n.text, false);
  for (const auto& c : n.children) render(c, out);
  out += "</";
  out += n.tag;
  out += '>';
}

inline std::size_t count_nodes(const GenNode& n) {
  std::size_t k = 1;
  for (const auto& c : n.children) k += count_nodes(c);
  return k;
}

// Pre-order list of node pointers (parent before children).
inline void collect(GenNode& n, std::vector<GenNode*>& out) {
  out.push_back(&n);
  for (auto& c : n.children) collect(c, out);
}

class FixtureBuilder {
 public:
  FixtureBuilder(const FixtureSpec& spec, std::uint64_t seed) : spec_(spec), rng_(seed) {}

  FixtureRecord build(std::size_t index) {
    FixtureRecord fx;
    GenNode root = tree();
    fx.reference_nodes = count_nodes(root);
    std::string reference;
    render(root, reference);

    GenNode hyp = root;
    const auto& r = spec_.rates;
    if (coin(r.drop_node) && drop(hyp)) ++fx.corruptions["drop-node"];
    if (coin(r.relabel_tag)) {
      std::size_t n = relabel(hyp, spec_.relabels);
      if (n) fx.corruptions["relabel-tag"] = n;
    }
    if (coin(r.swap_siblings) && swap(hyp)) ++fx.corruptions["swap-siblings"];
    if (coin(r.perturb_text) && perturb(hyp)) ++fx.corruptions["perturb-text"];
    std::string hypothesis;
    render(hyp, hypothesis);
    if (coin(r.break_wellformedness)) {
      // Drop the final close tag so the top-level element is never closed.
      hypothesis.resize(hypothesis.size() - (hyp.tag.size() + 3));
      ++fx.corruptions["break-wellformedness"];
    }
    fx.record = {"doc" + std::to_string(index), std::nullopt, std::move(hypothesis), std::move(reference)};
    return fx;
  }

 private:
  bool coin(double p) { return p > 0.0 && unit() < p; }
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

  const std::string& tag() { return fixture_tags()[pick(spec_.tag_vocabulary)]; }

  std::string words(std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += fixture_words()[pick(fixture_words().size())];
    }
    return s;
  }

  std::size_t node_target() {
    double mu = std::log(spec_.node_median);
    double sigma = std::sqrt(2.0 * std::log(spec_.node_mean / spec_.node_median));
    std::lognormal_distribution<double> dist(mu, sigma);
    auto n = static_cast<std::size_t>(std::llround(dist(rng_)));
    return std::clamp(n, spec_.min_nodes, spec_.max_nodes);
  }

  GenNode fresh(std::size_t serial) {
    GenNode n;
    n.tag = tag();
    if (coin(spec_.attribute_probability)) n.attributes.emplace_back("id", "n" + std::to_string(serial));
    if (coin(spec_.text_probability)) n.text = words(1 + pick(6));
    return n;
  }

  GenNode tree() {
    std::size_t target = node_target();
    GenNode root = fresh(0);
    // Grow by attaching each new node under a random node above the depth cap.
    struct Slot {
      std::vector<std::size_t> path;
    };
    std::vector<Slot> slots{{{}}};
    for (std::size_t k = 1; k < target; ++k) {
      std::vector<std::size_t> open;
      for (std::size_t s = 0; s < slots.size(); ++s)
        if (slots[s].path.size() + 1 < spec_.max_depth) open.push_back(s);
      if (open.empty()) break;
      // Bias toward recently added nodes to get deeper, document-like shapes.
      std::size_t a = open[pick(open.size())], b = open[pick(open.size())];
      const Slot parent = slots[std::max(a, b)];
      GenNode* p = &root;
      for (std::size_t i : parent.path) p = &p->children[i];
      p->children.push_back(fresh(k));
      Slot child = parent;
      child.path.push_back(p->children.size() - 1);
      slots.push_back(std::move(child));
    }
    return root;
  }

  bool drop(GenNode& root) {
    std::vector<GenNode*> all;
    collect(root, all);
    std::vector<std::pair<GenNode*, std::size_t>> edges;  // (parent, child index)
    for (GenNode* n : all)
      for (std::size_t i = 0; i < n->children.size(); ++i) edges.emplace_back(n, i);
    if (edges.empty()) return false;
    auto [p, i] = edges[pick(edges.size())];
    p->children.erase(p->children.begin() + static_cast<std::ptrdiff_t>(i));
    return true;
  }

  // Relabels distinct nodes to tags that never occur in a reference.
  std::size_t relabel(GenNode& root, std::size_t count) {
    std::vector<GenNode*> all;
    collect(root, all);
    std::vector<GenNode*> pool;
    for (GenNode* n : all)
      if (n->tag.rfind("relabeled-", 0) != 0) pool.push_back(n);
    std::size_t done = 0;
    while (done < count && !pool.empty()) {
      std::size_t j = pick(pool.size());
      pool[j]->tag = "relabeled-" + pool[j]->tag;
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
      ++done;
    }
    return done;
  }

  // Swaps two adjacent siblings with different tags.
  bool swap(GenNode& root) {
    std::vector<GenNode*> all;
    collect(root, all);
    std::vector<std::pair<GenNode*, std::size_t>> cands;
    for (GenNode* n : all)
      for (std::size_t i = 0; i + 1 < n->children.size(); ++i)
        if (n->children[i].tag != n->children[i + 1].tag) cands.emplace_back(n, i);
    if (cands.empty()) return false;
    auto [p, i] = cands[pick(cands.size())];
    std::swap(p->children[i], p->children[i + 1]);
    return true;
  }

  bool perturb(GenNode& root) {
    std::vector<GenNode*> all;
    collect(root, all);
    std::vector<GenNode*> texts;
    for (GenNode* n : all)
      if (!n->text.empty()) texts.push_back(n);
    if (texts.empty()) return false;
    GenNode* n = texts[pick(texts.size())];
    std::string w;
    do {
      w = words(1);
    } while (n->text.find(w) != std::string::npos);
    auto space = n->text.find(' ');
    n->text = w + (space == std::string::npos ? "" : n->text.substr(space));
    return true;
  }

  const FixtureSpec& spec_;
  std::mt19937_64 rng_;
};

}  // namespace detail

// Deterministic per seed; each record draws from its own sub-stream.
inline std::vector<FixtureRecord> generate_fixtures(const FixtureSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<FixtureRecord> out;
  out.reserve(spec.doc_count);
  for (std::size_t i = 0; i < spec.doc_count; ++i) {
    detail::FixtureBuilder b(spec, splitmix64(seed ^ splitmix64(i + 1)));
    out.push_back(b.build(i));
  }
  return out;
}

inline std::vector<CorpusRecord> records_of(const std::vector<FixtureRecord>& fx) {
  std::vector<CorpusRecord> out;
  for (const auto& f : fx) out.push_back(f.record);
  return out;
}

}  // namespace structeval
