// structeval: evaluate structured translations, compare systems, serve
// rewards to RL trainers and run the GRPO desk simulator.

#include <atomic>
#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "structeval/cli.hpp"
#include "structeval/fixtures.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void install_signal_handlers() {
  struct sigaction sa{};
  sa.sa_handler = on_signal;
  sigemptyset(&sa.sa_mask);
  sa.sa_flags = 0;  // no SA_RESTART: a blocked read returns so stdio serving can stop
  sigaction(SIGINT, &sa, nullptr);
  sigaction(SIGTERM, &sa, nullptr);
}

void add_metric_flags(CLI::App* cmd, structeval::cli::MetricOptions& m) {
  cmd->add_option("--metrics", m.metrics, "Comma-separated metric names (default: all)");
  cmd->add_option("--strucauc-k", m.strucauc_k, "StrucAUC edit budget K")->capture_default_str();
  cmd->add_option("--tokenizer", m.tokenizer, "BLEU tokenizer: whitespace|character")->capture_default_str();
  cmd->add_option_function<std::string>(
         "--attrs", [&m](const std::string& v) { m.attrs = v == "on"; }, "Compare attributes in XML-Match: on|off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--threads", m.threads, "Worker threads (default: STRUCTEVAL_THREADS or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace structeval;
  CLI::App app{"Structure-aware evaluation and rewards for XML document translation"};
  app.require_subcommand(1);

  cli::EvalOptions eval;
  auto* ev = app.add_subcommand("eval", "Score a corpus and print a report");
  ev->add_option("--corpus", eval.corpus, "JSONL corpus (id, hypothesis, reference)");
  ev->add_option("--hyp,--hyp-dir", eval.hyp, "Hypothesis file or directory");
  ev->add_option("--ref,--ref-dir", eval.ref, "Reference file or directory");
  ev->add_option("--format", eval.format, "Report format: json|tsv")->capture_default_str();
  ev->add_option("--out", eval.out, "Write the report here instead of stdout");
  add_metric_flags(ev, eval.metric);

  cli::CompareOptions cmp;
  auto* cm = app.add_subcommand("compare", "Paired bootstrap comparison of two systems");
  cm->add_option("--baseline", cmp.baseline, "Baseline JSONL corpus")->required();
  cm->add_option("--system", cmp.system, "System JSONL corpus")->required();
  cm->add_option("--trials", cmp.trials, "Bootstrap trials")->capture_default_str();
  cm->add_option("--seed", cmp.seed, "Resampling seed")->capture_default_str();
  add_metric_flags(cm, cmp.metric);

  cli::ServeOptions serve;
  auto* sv = app.add_subcommand("serve", "Line-delimited JSON reward service");
  sv->add_flag("--stdio", "Serve on stdin/stdout (default)");
  sv->add_option("--listen", serve.listen, "Serve over TCP on host:port instead");

  cli::SimulateOptions sim;
  auto* sm = app.add_subcommand("simulate", "GRPO on a categorical policy over candidate pools");
  sm->add_option("--pool", sim.pool, "JSONL candidate pools")->required();
  sm->add_option("--reward", sim.reward, "Reward components, comma-separated")->capture_default_str();
  sm->add_option("--k", sim.train.k, "Samples per step")->capture_default_str();
  sm->add_option("--beta", sim.train.beta, "KL coefficient")->capture_default_str();
  sm->add_option("--lr", sim.train.learning_rate, "Learning rate")->capture_default_str();
  sm->add_option("--steps", sim.train.steps, "Update steps")->capture_default_str();
  sm->add_option("--seed", sim.train.seed, "Sampling seed")->capture_default_str();

  FixtureSpec fx;
  std::uint64_t fx_seed = 0;
  auto* gen = app.add_subcommand("generate", "Write a synthetic fixture corpus as JSONL");
  gen->add_option("--docs", fx.doc_count, "Documents")->capture_default_str();
  gen->add_option("--seed", fx_seed, "Generator seed")->capture_default_str();
  gen->add_option("--drop", fx.rates.drop_node, "Drop-node rate");
  gen->add_option("--relabel", fx.rates.relabel_tag, "Relabel-tag rate");
  gen->add_option("--relabels", fx.relabels, "Relabels per document when relabel fires");
  gen->add_option("--swap", fx.rates.swap_siblings, "Swap-siblings rate");
  gen->add_option("--break", fx.rates.break_wellformedness, "Break-wellformedness rate");
  gen->add_option("--perturb", fx.rates.perturb_text, "Perturb-text rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitUsage;
  }

  if (*ev) return cli::cmd_eval(eval, std::cout, std::cerr);
  if (*cm) return cli::cmd_compare(cmp, std::cout, std::cerr);
  if (*sv) {
    install_signal_handlers();
    return cli::cmd_serve(serve, std::cin, std::cout, std::cerr, g_stop);
  }
  if (*sm) return cli::cmd_simulate(sim, std::cout, std::cerr);
  if (*gen) {
    try {
      write_corpus(std::cout, records_of(generate_fixtures(fx, fx_seed)));
      return cli::kExitOk;
    } catch (const std::exception& e) {
      std::cerr << "structeval generate: " << e.what() << '\n';
      return cli::kExitUsage;
    }
  }
  return cli::kExitUsage;
}
