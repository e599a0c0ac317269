#pragma once

// Corpus files and evaluation reports.
//
// Corpus JSONL: one object per line with string fields "id", "hypothesis",
// "reference" and optionally "source". Unknown fields are ignored.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "structeval/docmetrics.hpp"
#include "structeval/error.hpp"

namespace structeval {

struct CorpusRecord {
  std::string id;
  std::optional<std::string> source;
  std::string hypothesis;
  std::string reference;

  bool operator==(const CorpusRecord&) const = default;
};

// Throws MalformedLine, DuplicateId.
inline std::vector<CorpusRecord> read_corpus(std::istream& in) {
  std::vector<CorpusRecord> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::is_blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedLine(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw MalformedLine(line_no, "expected a JSON object");
    auto field = [&](const char* name, bool required) -> std::optional<std::string> {
      auto it = j.find(name);
      if (it == j.end() || it->is_null()) {
        if (required) throw MalformedLine(line_no, std::string("missing field \"") + name + "\"");
        return std::nullopt;
      }
      if (!it->is_string()) throw MalformedLine(line_no, std::string("field \"") + name + "\" must be a string");
      return it->get<std::string>();
    };
    CorpusRecord r;
    r.id = *field("id", true);
    r.source = field("source", false);
    r.hypothesis = *field("hypothesis", true);
    r.reference = *field("reference", true);
    if (!ids.insert(r.id).second) throw DuplicateId(r.id);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<CorpusRecord> read_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_corpus(in);
}

inline nlohmann::ordered_json to_json(const CorpusRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  if (r.source) j["source"] = *r.source;
  j["hypothesis"] = r.hypothesis;
  j["reference"] = r.reference;
  return j;
}

inline void write_corpus(std::ostream& out, const std::vector<CorpusRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

// Filename-matched documents: every file in ref_dir needs a same-named file
// in hyp_dir. Records are ordered by filename.
inline std::vector<CorpusRecord> read_directory_pair(const std::filesystem::path& hyp_dir,
                                                     const std::filesystem::path& ref_dir) {
  namespace fs = std::filesystem;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  if (!fs::is_directory(ref_dir)) throw Error("not a directory: " + ref_dir.string());
  if (!fs::is_directory(hyp_dir)) throw Error("not a directory: " + hyp_dir.string());
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(ref_dir))
    if (e.is_regular_file()) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::vector<CorpusRecord> out;
  for (const auto& n : names) {
    if (!fs::exists(hyp_dir / n)) throw Error("no hypothesis file for " + n);
    out.push_back({n, std::nullopt, slurp(hyp_dir / n), slurp(ref_dir / n)});
  }
  return out;
}

inline std::vector<DocumentPair> to_document_pairs(const std::vector<CorpusRecord>& records) {
  std::vector<DocumentPair> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.id, r.hypothesis, r.reference});
  return out;
}

// ---------------------------------------------------------------------------
// Reports

enum class ReportFormat { json, tsv };

inline std::string format_fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

namespace detail {

inline bool is_doc_metric(const std::string& m) {
  return m == "xml_validity" || m == "xml_match" || m == "treesim" || m == "node_chrf" || m == "optimal_node_chrf";
}

inline bool wants_edit_count(const std::vector<std::string>& metrics) {
  return std::find(metrics.begin(), metrics.end(), "strucauc") != metrics.end() ||
         std::find(metrics.begin(), metrics.end(), "optimal_node_chrf") != metrics.end();
}

inline double doc_value(const DocScores& d, const std::string& m) {
  if (m == "xml_validity") return d.xml_validity;
  if (m == "xml_match") return d.xml_match;
  if (m == "treesim") return d.tree_sim;
  if (m == "node_chrf") return d.node_chrf;
  return d.optimal_node_chrf;
}

inline std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

inline std::string tsv_field(std::string s) {
  for (char& c : s)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace detail

// Byte-stable rendering: fixed key order, 4-decimal numbers.
inline std::string write_report(const CorpusReport& rep, ReportFormat fmt) {
  std::ostringstream o;
  const bool edits = detail::wants_edit_count(rep.metrics);
  if (fmt == ReportFormat::json) {
    o << "{\n";
    o << "  \"metrics\": [";
    for (std::size_t i = 0; i < rep.metrics.size(); ++i) o << (i ? ", " : "") << detail::json_string(rep.metrics[i]);
    o << "],\n";
    o << "  \"strucauc_k\": " << format_fixed4(rep.strucauc_k) << ",\n";
    o << "  \"documents\": " << rep.per_doc.size() << ",\n";
    o << "  \"scored_documents\": " << rep.totals.documents << ",\n";
    o << "  \"corpus\": {";
    for (std::size_t i = 0; i < rep.metrics.size(); ++i)
      o << (i ? ", " : "") << detail::json_string(rep.metrics[i]) << ": "
        << format_fixed4(rep.totals.values.at(rep.metrics[i]));
    o << "},\n";
    if (edits) o << "  \"mean_edit_count\": " << format_fixed4(rep.totals.mean_edit_count) << ",\n";
    if (std::find(rep.metrics.begin(), rep.metrics.end(), "strucauc") != rep.metrics.end()) {
      o << "  \"strucauc_curve\": [";
      for (std::size_t i = 0; i < rep.totals.strucauc_curve.size(); ++i) {
        const auto& [k, v] = rep.totals.strucauc_curve[i];
        o << (i ? ", " : "") << "[" << format_fixed4(k) << ", " << format_fixed4(v) << "]";
      }
      o << "],\n";
    }
    o << "  \"per_doc\": [";
    for (std::size_t i = 0; i < rep.per_doc.size(); ++i) {
      const DocScores& d = rep.per_doc[i];
      o << (i ? ",\n    " : "\n    ") << "{\"id\": " << detail::json_string(rep.ids[i])
        << ", \"status\": " << detail::json_string(to_string(d.status));
      for (const auto& m : rep.metrics) {
        if (!detail::is_doc_metric(m)) continue;
        o << ", " << detail::json_string(m) << ": ";
        o << (d.status == DocStatus::ref_invalid ? "null" : format_fixed4(detail::doc_value(d, m)));
      }
      if (edits) o << ", \"edit_count\": " << (d.edit_count ? format_fixed4(*d.edit_count) : "null");
      if (!d.reason.empty()) o << ", \"reason\": " << detail::json_string(d.reason);
      o << "}";
    }
    o << (rep.per_doc.empty() ? "]\n" : "\n  ]\n");
    o << "}\n";
    return o.str();
  }

  o << "id\tstatus";
  for (const auto& m : rep.metrics) o << '\t' << m;
  if (edits) o << "\tedit_count";
  o << '\n';
  for (std::size_t i = 0; i < rep.per_doc.size(); ++i) {
    const DocScores& d = rep.per_doc[i];
    o << detail::tsv_field(rep.ids[i]) << '\t' << to_string(d.status);
    for (const auto& m : rep.metrics) {
      o << '\t';
      if (detail::is_doc_metric(m) && d.status != DocStatus::ref_invalid) o << format_fixed4(detail::doc_value(d, m));
    }
    if (edits) o << '\t' << (d.edit_count ? format_fixed4(*d.edit_count) : "");
    o << '\n';
  }
  o << "ALL\tcorpus";
  for (const auto& m : rep.metrics) o << '\t' << format_fixed4(rep.totals.values.at(m));
  if (edits) o << '\t' << format_fixed4(rep.totals.mean_edit_count);
  o << '\n';
  return o.str();
}

}  // namespace structeval
