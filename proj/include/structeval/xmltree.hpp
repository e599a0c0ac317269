#pragma once

// Ordered labeled trees parsed from XML fragments.
//
// A document is parsed as a fragment under a synthetic dummy root, so a
// document may contain several top-level elements and stray text. Comments
// and processing instructions are dropped, a leading XML declaration and
// DOCTYPE are skipped, entity references are decoded, and node text is
// whitespace-normalized. Parsing never throws: malformed input yields an
// invalid ParseOutcome carrying a reason.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "structeval/text.hpp"

namespace structeval {

using NodeId = std::size_t;

struct TreeNode {
  std::string tag;  // empty only for the dummy root
  std::vector<std::pair<std::string, std::string>> attributes;  // sorted by name
  std::string direct_text;  // own text only, whitespace-normalized
  std::vector<NodeId> children;
  NodeId parent = 0;
};

class DocTree {
 public:
  DocTree() : nodes_(1) {}

  static constexpr NodeId root() { return 0; }
  const TreeNode& node(NodeId id) const { return nodes_[id]; }
  std::span<const TreeNode> nodes() const { return nodes_; }
  // Element count, dummy root excluded.
  std::size_t node_count() const { return nodes_.size() - 1; }

  // Character-data runs between tag boundaries, in document order, unnormalized.
  const std::vector<std::string>& raw_segments() const { return segments_; }

  // Pre-order over elements, dummy root excluded.
  std::vector<NodeId> preorder() const {
    std::vector<NodeId> out;
    out.reserve(node_count());
    std::vector<NodeId> stack(nodes_[0].children.rbegin(), nodes_[0].children.rend());
    while (!stack.empty()) {
      NodeId id = stack.back();
      stack.pop_back();
      out.push_back(id);
      const auto& ch = nodes_[id].children;
      stack.insert(stack.end(), ch.rbegin(), ch.rend());
    }
    return out;
  }

  // Builder interface, used by the parser and the fixture generator.
  NodeId add_child(NodeId parent, std::string tag,
                   std::vector<std::pair<std::string, std::string>> attributes = {}) {
    std::sort(attributes.begin(), attributes.end());
    NodeId id = nodes_.size();
    nodes_.push_back(TreeNode{std::move(tag), std::move(attributes), {}, {}, parent});
    nodes_[parent].children.push_back(id);
    return id;
  }
  void set_text(NodeId id, std::string_view raw) { nodes_[id].direct_text = text::normalize_space(raw); }
  void add_segment(std::string raw) { segments_.push_back(std::move(raw)); }

 private:
  std::vector<TreeNode> nodes_;
  std::vector<std::string> segments_;
};

class ParseOutcome {
 public:
  static ParseOutcome valid(DocTree t) { return ParseOutcome(std::move(t)); }
  static ParseOutcome invalid(std::string reason) {
    if (reason.empty()) reason = "malformed document";
    return ParseOutcome(std::move(reason));
  }

  bool ok() const { return std::holds_alternative<DocTree>(v_); }
  explicit operator bool() const { return ok(); }
  const DocTree& tree() const { return std::get<DocTree>(v_); }
  const DocTree* get() const { return std::get_if<DocTree>(&v_); }
  const std::string& reason() const { return std::get<std::string>(v_); }

 private:
  explicit ParseOutcome(DocTree t) : v_(std::move(t)) {}
  explicit ParseOutcome(std::string r) : v_(std::move(r)) {}
  std::variant<DocTree, std::string> v_;
};

namespace detail {

inline constexpr std::size_t kMaxDepth = 4096;

class FragmentParser {
 public:
  explicit FragmentParser(std::string_view s) : s_(s) {}

  ParseOutcome run() {
    stack_.push_back(Open{DocTree::root(), {}});
    while (pos_ < s_.size() && error_.empty()) {
      if (s_[pos_] == '<')
        markup();
      else if (s_[pos_] == '&')
        entity(chunk_);
      else
        char_data();
    }
    if (!error_.empty()) return ParseOutcome::invalid(error_);
    if (stack_.size() > 1) return ParseOutcome::invalid("unclosed element " + tree_.node(stack_.back().id).tag);
    flush_chunk();
    tree_.set_text(DocTree::root(), stack_.back().text);
    return ParseOutcome::valid(std::move(tree_));
  }

 private:
  struct Open {
    NodeId id;
    std::string text;
  };

  bool starts_with(std::string_view p) const { return s_.substr(pos_, p.size()) == p; }

  void fail(std::string why) {
    if (error_.empty()) error_ = std::move(why);
  }

  void flush_chunk() {
    if (chunk_.empty()) return;
    stack_.back().text += chunk_;
    tree_.add_segment(std::move(chunk_));
    chunk_.clear();
  }

  static bool name_start(unsigned char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == ':' || c >= 0x80;
  }
  static bool name_char(unsigned char c) {
    return name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
  }

  std::string name() {
    std::size_t b = pos_;
    if (pos_ >= s_.size() || !name_start(static_cast<unsigned char>(s_[pos_]))) return {};
    while (pos_ < s_.size() && name_char(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return std::string(s_.substr(b, pos_ - b));
  }

  void skip_space() {
    while (pos_ < s_.size() && text::is_space(s_[pos_])) ++pos_;
  }

  static bool legal_char(char32_t cp) {
    if (cp == 0x9 || cp == 0xA || cp == 0xD) return true;
    if (cp < 0x20) return false;
    if (cp == 0xFFFE || cp == 0xFFFF) return false;
    return true;
  }

  // Copies one validated code point from the input into out.
  bool copy_char(std::string& out) {
    std::size_t start = pos_;
    char32_t cp = 0;
    if (!text::decode_utf8(s_, pos_, cp)) {
      fail("invalid UTF-8 at offset " + std::to_string(start));
      return false;
    }
    if (!legal_char(cp)) {
      fail("illegal character at offset " + std::to_string(start));
      return false;
    }
    out.append(s_.substr(start, pos_ - start));
    return true;
  }

  void char_data() {
    while (pos_ < s_.size() && s_[pos_] != '<' && s_[pos_] != '&') {
      if (!copy_char(chunk_)) return;
    }
  }

  void entity(std::string& out) {
    std::size_t semi = s_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 32) {
      fail("unterminated entity reference at offset " + std::to_string(pos_));
      return;
    }
    std::string_view ref = s_.substr(pos_ + 1, semi - pos_ - 1);
    pos_ = semi + 1;
    if (ref == "lt") out += '<';
    else if (ref == "gt") out += '>';
    else if (ref == "amp") out += '&';
    else if (ref == "quot") out += '"';
    else if (ref == "apos") out += '\'';
    else if (ref.size() > 1 && ref[0] == '#') {
      char32_t cp = 0;
      bool hex = ref[1] == 'x';
      std::string_view digits = ref.substr(hex ? 2 : 1);
      if (digits.empty()) return fail("empty character reference");
      for (char c : digits) {
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else return fail("bad character reference &" + std::string(ref) + ";");
        cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(v);
        if (cp > 0x10FFFF) return fail("character reference out of range");
      }
      if (!legal_char(cp) || (cp >= 0xD800 && cp <= 0xDFFF))
        return fail("character reference to illegal character");
      text::append_utf8(out, cp);
    } else {
      fail("unknown entity &" + std::string(ref) + ";");
    }
  }

  void skip_until(std::string_view terminator, const char* what) {
    std::size_t end = s_.find(terminator, pos_);
    if (end == std::string_view::npos) return fail(std::string("unterminated ") + what);
    pos_ = end + terminator.size();
  }

  void doctype() {
    if (stack_.size() > 1 || seen_element_) return fail("DOCTYPE not allowed here");
    int bracket = 0;
    char quote = 0;
    for (pos_ += 9; pos_ < s_.size(); ++pos_) {
      char c = s_[pos_];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '[') {
        ++bracket;
      } else if (c == ']') {
        --bracket;
      } else if (c == '>' && bracket <= 0) {
        ++pos_;
        return;
      }
    }
    fail("unterminated DOCTYPE");
  }

  void markup() {
    if (starts_with("<!--")) {
      pos_ += 4;
      return skip_until("-->", "comment");
    }
    if (starts_with("<![CDATA[")) {
      pos_ += 9;
      std::size_t end = s_.find("]]>", pos_);
      if (end == std::string_view::npos) return fail("unterminated CDATA section");
      while (pos_ < end && error_.empty()) copy_char(chunk_);
      pos_ = end + 3;
      return;
    }
    if (starts_with("<!DOCTYPE")) return doctype();
    if (starts_with("<?")) {
      pos_ += 2;
      return skip_until("?>", "processing instruction");
    }
    if (starts_with("</")) return end_tag();
    start_tag();
  }

  void end_tag() {
    pos_ += 2;
    std::string tag = name();
    if (tag.empty()) return fail("malformed closing tag");
    skip_space();
    if (pos_ >= s_.size() || s_[pos_] != '>') return fail("malformed closing tag </" + tag);
    ++pos_;
    if (stack_.size() == 1) return fail("unexpected closing tag </" + tag + ">");
    const std::string& open = tree_.node(stack_.back().id).tag;
    if (open != tag) return fail("mismatched closing tag </" + tag + "> for <" + open + ">");
    flush_chunk();
    tree_.set_text(stack_.back().id, stack_.back().text);
    stack_.pop_back();
  }

  void start_tag() {
    ++pos_;
    std::string tag = name();
    if (tag.empty()) return fail("malformed tag at offset " + std::to_string(pos_ - 1));
    std::vector<std::pair<std::string, std::string>> attrs;
    for (;;) {
      std::size_t before = pos_;
      skip_space();
      if (pos_ >= s_.size()) return fail("unterminated tag <" + tag);
      if (s_[pos_] == '>' || starts_with("/>")) break;
      if (pos_ == before) return fail("malformed attributes in <" + tag + ">");
      std::string attr = name();
      if (attr.empty()) return fail("malformed attributes in <" + tag + ">");
      skip_space();
      if (pos_ >= s_.size() || s_[pos_] != '=') return fail("attribute " + attr + " without value");
      ++pos_;
      skip_space();
      if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\'')) return fail("unquoted attribute " + attr);
      char quote = s_[pos_++];
      std::string value;
      while (pos_ < s_.size() && s_[pos_] != quote && error_.empty()) {
        if (s_[pos_] == '<') return fail("'<' in attribute value");
        if (s_[pos_] == '&')
          entity(value);
        else
          copy_char(value);
      }
      if (!error_.empty()) return;
      if (pos_ >= s_.size()) return fail("unterminated attribute value");
      ++pos_;
      for (const auto& [n, v] : attrs)
        if (n == attr) return fail("duplicate attribute " + attr);
      attrs.emplace_back(std::move(attr), std::move(value));
    }
    bool empty = s_[pos_] == '/';
    pos_ += empty ? 2 : 1;
    if (stack_.size() > kMaxDepth) return fail("nesting too deep");
    flush_chunk();
    seen_element_ = true;
    NodeId id = tree_.add_child(stack_.back().id, std::move(tag), std::move(attrs));
    if (!empty) stack_.push_back(Open{id, {}});
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  DocTree tree_;
  std::vector<Open> stack_;
  std::string chunk_;
  std::string error_;
  bool seen_element_ = false;
};

inline void escape_into(std::string& out, std::string_view s, bool attribute) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"':
        if (attribute) {
          out += "&quot;";
          break;
        }
        [[fallthrough]];
      default: out += c;
    }
  }
}

inline void serialize_into(const DocTree& t, NodeId id, std::string& out) {
  const TreeNode& n = t.node(id);
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
  escape_into(out, n.direct_text, false);
  for (NodeId c : n.children) serialize_into(t, c, out);
  out += "</";
  out += n.tag;
  out += '>';
}

}  // namespace detail

inline ParseOutcome parse_document(std::string_view text) { return detail::FragmentParser(text).run(); }

// Canonical form of one element and its descendants: sorted attributes,
// normalized direct text placed before the children, no indentation.
inline std::string serialize_subtree(const DocTree& t, NodeId id) {
  std::string out;
  detail::serialize_into(t, id, out);
  return out;
}

// Canonical form of a whole document (root text first, then top-level elements).
inline std::string serialize(const DocTree& t) {
  std::string out;
  detail::escape_into(out, t.node(DocTree::root()).direct_text, false);
  for (NodeId c : t.node(DocTree::root()).children) detail::serialize_into(t, c, out);
  return out;
}

inline bool is_isomorphic(const DocTree& a, const DocTree& b, bool compare_attributes) {
  std::vector<std::pair<NodeId, NodeId>> stack{{DocTree::root(), DocTree::root()}};
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    const TreeNode& nx = a.node(x);
    const TreeNode& ny = b.node(y);
    if (nx.tag != ny.tag || nx.children.size() != ny.children.size()) return false;
    if (compare_attributes && nx.attributes != ny.attributes) return false;
    for (std::size_t i = 0; i < nx.children.size(); ++i) stack.emplace_back(nx.children[i], ny.children[i]);
  }
  return true;
}

inline std::vector<std::string> text_segments(const DocTree& t) {
  std::vector<std::string> out;
  for (const auto& raw : t.raw_segments()) {
    std::string s = text::normalize_space(raw);
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

inline std::string strip_markup(std::string_view doc) {
  if (auto parsed = parse_document(doc)) {
    std::string out;
    for (const auto& seg : text_segments(parsed.tree())) {
      if (!out.empty()) out += ' ';
      out += seg;
    }
    return out;
  }
  static const std::regex tag_like("<[^<>]*>");
  return text::normalize_space(std::regex_replace(std::string(doc), tag_like, " "));
}

}  // namespace structeval
