#pragma once

// Command implementations behind the structeval executable. Each returns a
// process exit code: 0 on success, 2 on usage or input errors.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "structeval/corpusio.hpp"
#include "structeval/docmetrics.hpp"
#include "structeval/grposim.hpp"
#include "structeval/service.hpp"
#include "structeval/stats.hpp"

namespace structeval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;

// Explicit flag, then STRUCTEVAL_THREADS, then hardware concurrency.
inline unsigned resolve_threads(unsigned flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("STRUCTEVAL_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::size_t b = 0;
  while (b <= s.size()) {
    std::size_t e = s.find(',', b);
    if (e == std::string::npos) e = s.size();
    auto part = text::trim(std::string_view(s).substr(b, e - b));
    if (!part.empty()) out.emplace_back(part);
    b = e + 1;
  }
  return out;
}

struct MetricOptions {
  std::string metrics;  // csv; empty = all
  double strucauc_k = 5.0;
  std::string tokenizer = "whitespace";
  bool attrs = true;
  unsigned threads = 0;

  EvalConfig config() const {
    EvalConfig cfg;
    cfg.strucauc_k = strucauc_k;
    if (tokenizer == "whitespace")
      cfg.bleu.tokenizer = Tokenizer::whitespace;
    else if (tokenizer == "character")
      cfg.bleu.tokenizer = Tokenizer::character;
    else
      throw ConfigError("unknown tokenizer '" + tokenizer + "' (valid: whitespace, character)");
    if (!(strucauc_k > 0.0)) throw ConfigError("--strucauc-k must be positive");
    cfg.compare_attributes = attrs;
    cfg.threads = resolve_threads(threads);
    return cfg;
  }

  std::vector<std::string> metric_list() const {
    auto list = split_csv(metrics);
    for (const auto& m : list) {
      if (!is_metric_name(m)) {
        std::string valid;
        for (const auto& v : metric_names()) valid += (valid.empty() ? "" : ", ") + v;
        throw ConfigError("unknown metric '" + m + "' (valid: " + valid + ")");
      }
    }
    return list;
  }
};

struct EvalOptions {
  std::string corpus;
  std::string hyp;
  std::string ref;
  std::string format = "json";
  std::string out;
  MetricOptions metric;
};

inline std::vector<CorpusRecord> load_eval_corpus(const EvalOptions& o) {
  namespace fs = std::filesystem;
  if (!o.corpus.empty()) {
    if (!o.hyp.empty() || !o.ref.empty()) throw ConfigError("use either --corpus or --hyp/--ref, not both");
    return read_corpus_file(o.corpus);
  }
  if (o.hyp.empty() || o.ref.empty()) throw ConfigError("need --corpus or both --hyp and --ref");
  if (fs::is_directory(o.hyp) && fs::is_directory(o.ref)) return read_directory_pair(o.hyp, o.ref);
  if (fs::is_regular_file(o.hyp) && fs::is_regular_file(o.ref)) {
    auto slurp = [](const std::string& p) {
      std::ifstream in(p, std::ios::binary);
      if (!in) throw Error("cannot open " + p);
      return std::string(std::istreambuf_iterator<char>(in), {});
    };
    return {{fs::path(o.ref).filename().string(), std::nullopt, slurp(o.hyp), slurp(o.ref)}};
  }
  throw Error("--hyp and --ref must both be directories or both be files");
}

inline int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  try {
    ReportFormat fmt;
    if (o.format == "json")
      fmt = ReportFormat::json;
    else if (o.format == "tsv")
      fmt = ReportFormat::tsv;
    else
      throw ConfigError("unknown format '" + o.format + "' (valid: json, tsv)");
    auto metrics = o.metric.metric_list();
    auto cfg = o.metric.config();
    auto records = load_eval_corpus(o);
    auto pairs = to_document_pairs(records);
    auto report = evaluate_corpus(pairs, metrics, cfg);
    std::string text = write_report(report, fmt);
    if (o.out.empty()) {
      out << text;
    } else {
      std::ofstream f(o.out, std::ios::binary);
      if (!f) throw Error("cannot write " + o.out);
      f << text;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "structeval eval: " << e.what() << '\n';
    return kExitUsage;
  }
}

struct CompareOptions {
  std::string baseline;
  std::string system;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  MetricOptions metric;
};

// Prints: metric, baseline score, system score, one-sided p-value.
inline int cmd_compare(const CompareOptions& o, std::ostream& out, std::ostream& err) {
  try {
    auto metrics = o.metric.metric_list();
    if (metrics.empty()) metrics = metric_names();
    auto cfg = o.metric.config();
    auto base = read_corpus_file(o.baseline);
    auto sys = read_corpus_file(o.system);
    if (base.size() != sys.size()) throw Error("baseline and system cover different documents");
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < sys.size(); ++i) pos[sys[i].id] = i;
    std::vector<CorpusRecord> sys_aligned;
    for (const auto& r : base) {
      auto it = pos.find(r.id);
      if (it == pos.end()) throw Error("id '" + r.id + "' missing from system corpus");
      sys_aligned.push_back(sys[it->second]);
    }
    auto base_pairs = to_document_pairs(base);
    auto sys_pairs = to_document_pairs(sys_aligned);
    auto base_report = evaluate_corpus(base_pairs, metrics, cfg);
    auto sys_report = evaluate_corpus(sys_pairs, metrics, cfg);

    BootstrapConfig bc;
    bc.trials = o.trials;
    bc.seed = o.seed;
    bc.threads = cfg.threads;
    out << "metric\tbaseline\tsystem\tp_value\n";
    for (const auto& m : metrics) {
      auto score = [&](std::span<const DocScores> docs, std::span<const std::size_t> idx) {
        try {
          return aggregate(docs, idx, cfg).values.at(m);
        } catch (const EmptyCorpus&) {
          return 0.0;
        }
      };
      double p = paired_bootstrap<DocScores>(base_report.per_doc, sys_report.per_doc, score, bc);
      out << m << '\t' << format_fixed4(base_report.totals.values.at(m)) << '\t'
          << format_fixed4(sys_report.totals.values.at(m)) << '\t' << format_fixed4(p) << '\n';
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "structeval compare: " << e.what() << '\n';
    return kExitUsage;
  }
}

struct ServeOptions {
  std::string listen;  // empty = stdio
};

inline int cmd_serve(const ServeOptions& o, std::istream& in, std::ostream& out, std::ostream& err,
                     const std::atomic<bool>& stop_flag) {
  if (o.listen.empty()) {
    serve_stream(in, out);
    return kExitOk;
  }
  try {
    auto colon = o.listen.rfind(':');
    if (colon == std::string::npos) throw ConfigError("--listen expects host:port");
    std::string host = o.listen.substr(0, colon);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    int port = std::stoi(o.listen.substr(colon + 1));
    TcpRewardServer server(host, port);
    err << "structeval serve: listening on " << host << ":" << server.port() << '\n';
    server.run(stop_flag);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "structeval serve: " << e.what() << '\n';
    return kExitUsage;
  }
}

struct SimulateOptions {
  std::string pool;
  std::string reward = "treesim";
  TrainConfig train{};
};

// Pool JSONL: {"source_id": "...", "reference": "...", "candidates": ["...", ...]} per line.
inline std::vector<CandidatePool> read_pools(std::istream& in, const RewardSpec& spec) {
  std::vector<CandidatePool> pools;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw MalformedLine(line_no, "invalid JSON");
    }
    if (!j.is_object() || !j.contains("reference") || !j["reference"].is_string() || !j.contains("candidates") ||
        !j["candidates"].is_array())
      throw MalformedLine(line_no, "expected \"reference\" string and \"candidates\" array");
    std::vector<std::string> cands;
    for (const auto& c : j["candidates"]) {
      if (!c.is_string()) throw MalformedLine(line_no, "candidates must be strings");
      cands.push_back(c.get<std::string>());
    }
    std::string id = j.value("source_id", "pool" + std::to_string(pools.size()));
    if (cands.size() < 2) throw MalformedLine(line_no, "pool needs at least 2 candidates");
    pools.push_back(make_pool(id, std::move(cands), j["reference"].get<std::string>(), spec));
  }
  return pools;
}

inline int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  try {
    o.train.validate();
    RewardSpec spec = RewardSpec::parse(o.reward);
    std::ifstream in(o.pool, std::ios::binary);
    if (!in) throw Error("cannot open " + o.pool);
    auto pools = read_pools(in, spec);
    if (pools.empty()) throw Error("no candidate pools in " + o.pool);
    for (const auto& pool : pools) {
      auto trace = run_training(pool, o.train);
      for (const auto& s : trace.steps) {
        nlohmann::ordered_json j;
        j["source_id"] = trace.source_id;
        j["step"] = s.step;
        j["mean_reward"] = s.mean_reward;
        j["expected_reward"] = s.expected_reward;
        j["kl"] = s.kl;
        j["entropy"] = s.entropy;
        out << j.dump() << '\n';
      }
      nlohmann::ordered_json fin;
      fin["source_id"] = trace.source_id;
      fin["rewards"] = pool.rewards;
      fin["final_probabilities"] = trace.final_probabilities;
      out << fin.dump() << '\n';
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "structeval simulate: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace structeval::cli
