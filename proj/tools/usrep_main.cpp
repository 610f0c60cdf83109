// Copyright (c) 2026 The usrep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// usrep: corpus segmentation, fragment table lifecycle, SFT dataset
// generation, statistics, evaluation and the review service.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "usrep/commands.hpp"
#include "usrep/config.hpp"
#include "usrep/io.hpp"
#include "usrep/review_server.hpp"

namespace {

using usrep::cli::ExitCode;

usrep::review::ReviewServer* g_server = nullptr;

void HandleSignal(int) {
  if (g_server != nullptr) g_server->Stop();
}

// "host:port" or ":port" or "port".
bool SplitBind(const std::string& bind, std::string& host, int& port) {
  const auto colon = bind.rfind(':');
  host = colon == std::string::npos || colon == 0 ? "127.0.0.1" : bind.substr(0, colon);
  try {
    port = std::stoi(colon == std::string::npos ? bind : bind.substr(colon + 1));
  } catch (const std::exception&) {
    return false;
  }
  return port >= 0 && port < 65536;
}

int Serve(const usrep::ToolConfig& config, const std::string& table, const std::string& corpus_path,
          const std::string& audit, const std::string& bind, const std::string& static_dir) {
  try {
    usrep::io::RequireFile(table);
    usrep::io::FileLock lock(table);
    std::vector<usrep::Report> corpus;
    if (!corpus_path.empty()) corpus = usrep::cli::LoadCorpus(corpus_path);
    usrep::review::StoreOptions opt;
    opt.table_path = table;
    opt.audit_path = audit;
    opt.rules = usrep::cli::LoadRules(config);
    opt.delimiters = config.delimiters;
    usrep::review::ReviewStore store(std::move(opt), std::move(corpus));
    usrep::review::ReviewServer server(store, static_dir);
    std::string host;
    int port = 0;
    if (!SplitBind(bind, host, port)) {
      std::cerr << "error: bad bind address '" << bind << "'\n";
      return usrep::cli::kExitUsage;
    }
    const int bound = server.Bind(host, port);
    if (bound < 0) {
      std::cerr << "error: cannot bind " << bind << '\n';
      return usrep::cli::kExitUnavailable;
    }
    std::cerr << "serving review API on " << host << ':' << bound << '\n';
    g_server = &server;
    std::signal(SIGINT, HandleSignal);
    std::signal(SIGTERM, HandleSignal);
    server.Listen();
    g_server = nullptr;
    return usrep::cli::kExitOk;
  } catch (const usrep::io::MissingInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usrep::cli::kExitMissingInput;
  } catch (const usrep::io::LockHeldError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usrep::cli::kExitUnavailable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usrep::cli::kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fragment-based bilingual ultrasound report toolkit"};
  app.require_subcommand(1);

  std::string config_path, rules_path, keywords_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_option("--rules", rules_path, "Protected-term rules file");

  std::string delimiters, join_separator, join_terminal;
  app.add_option("--delimiters", delimiters, "Fragment delimiter characters");
  app.add_option("--join-separator", join_separator, "Separator between English fragments");
  app.add_option("--join-terminal", join_terminal, "Terminal punctuation for English reports");

  auto* seg = app.add_subcommand("segment", "Split corpus reports into fragments");
  usrep::cli::SegmentArgs seg_args;
  seg->add_option("--corpus", seg_args.corpus)->required();
  seg->add_option("--out", seg_args.out)->required();

  auto* build = app.add_subcommand("build-table", "Build the fragment lookup table");
  usrep::cli::BuildTableArgs build_args;
  build->add_option("--corpus", build_args.corpus)->required();
  build->add_option("--candidates", build_args.candidates, "TSV of candidate translations");
  build->add_option("--out", build_args.out)->required();

  auto* validate = app.add_subcommand("validate-table", "Check protected terms over all entries");
  usrep::cli::ValidateTableArgs validate_args;
  validate->add_option("--table", validate_args.table)->required();
  validate->add_option("--out", validate_args.out)->required();

  auto* gen = app.add_subcommand("gen-dataset", "Generate the four-prompt SFT dataset");
  usrep::cli::GenDatasetArgs gen_args;
  std::string prompts_path;
  int image_tokens = 0;
  bool text_only_queries = false;
  gen->add_option("--corpus", gen_args.corpus)->required();
  gen->add_option("--table", gen_args.table)->required();
  gen->add_option("--out", gen_args.out)->required();
  gen->add_option("--skips", gen_args.skips, "Skip manifest (default <out>.skips.jsonl)");
  gen->add_option("--prompts", prompts_path, "JSON prompt texts per prompt type");
  gen->add_option("--image-tokens", image_tokens, "Image placeholders per image")->check(CLI::PositiveNumber);
  gen->add_flag("--text-only-queries", text_only_queries, "Omit images from *FromQuery samples");

  auto* stats = app.add_subcommand("stats", "Fragment distribution per organ site");
  usrep::cli::StatsArgs stats_args;
  stats->add_option("--corpus", stats_args.corpus)->required();
  stats->add_option("--out", stats_args.out)->required();

  auto* eval = app.add_subcommand("eval", "Score hypotheses against references");
  usrep::cli::EvalArgs eval_args;
  std::string bleu_mode, tokenization;
  double cider_scale = 0, rouge_beta = 0;
  eval->add_option("--hyps", eval_args.hyps)->required();
  eval->add_option("--refs", eval_args.refs)->required();
  eval->add_option("--keywords", keywords_path, "JSON keyword list per site");
  eval->add_option("--embeddings", eval_args.embeddings, "JSONL token embeddings");
  eval->add_option("--baseline", eval_args.baseline, "Earlier metric report to compare against");
  eval->add_option("--out", eval_args.out)->required();
  eval->add_option("--bleu-mode", bleu_mode)->check(CLI::IsMember({"corpus", "sentence"}));
  eval->add_option("--tokenization", tokenization)->check(CLI::IsMember({"builtin", "whitespace"}));
  eval->add_option("--cider-scale", cider_scale)->check(CLI::PositiveNumber);
  eval->add_option("--rouge-beta", rouge_beta)->check(CLI::PositiveNumber);

  auto* diff = app.add_subcommand("diff", "Fragment-level extra/missing analysis");
  usrep::cli::DiffArgs diff_args;
  diff->add_option("--pred", diff_args.pred)->required();
  diff->add_option("--ref", diff_args.ref)->required();
  diff->add_option("--out", diff_args.out)->required();

  auto* serve = app.add_subcommand("serve", "Run the translation review service");
  std::string serve_table, serve_corpus, serve_audit, serve_static;
  const char* env_bind = std::getenv("USREP_BIND");
  std::string serve_bind = env_bind != nullptr ? env_bind : "127.0.0.1:8080";
  serve->add_option("--table", serve_table)->required();
  serve->add_option("--corpus", serve_corpus, "Corpus for example contexts and stats");
  serve->add_option("--audit", serve_audit, "Audit log (default <table>.audit.jsonl)");
  serve->add_option("--bind", serve_bind, "host:port (default $USREP_BIND or 127.0.0.1:8080)");
  serve->add_option("--static", serve_static, "Directory with the review UI bundle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : usrep::cli::kExitUsage;
  }

  usrep::ToolConfig config;
  try {
    if (!config_path.empty())
      config = usrep::ApplyConfigJson(config, nlohmann::json::parse(usrep::io::ReadFile(config_path)));
    if (!delimiters.empty()) config.delimiters = usrep::text::Decode(delimiters);
    if (!join_separator.empty()) config.join.separator = join_separator;
    if (!join_terminal.empty()) config.join.terminal = join_terminal;
    if (!rules_path.empty()) config.protected_terms_path = rules_path;
    if (!keywords_path.empty()) config.keywords_path = keywords_path;
    if (!prompts_path.empty())
      config.prompts = usrep::PromptTextsFromJson(nlohmann::json::parse(usrep::io::ReadFile(prompts_path)));
    if (image_tokens > 0) config.image_token_count = image_tokens;
    if (text_only_queries) config.query_images = false;
    if (!bleu_mode.empty()) config.eval.bleu_mode = usrep::metrics::ParseBleuMode(bleu_mode);
    if (!tokenization.empty()) config.eval.tokenization = usrep::metrics::ParseTokenization(tokenization);
    if (cider_scale > 0) config.eval.cider_scale = cider_scale;
    if (rouge_beta > 0) config.eval.rouge_beta = rouge_beta;
    if (!serve_table.empty()) config.table_path = serve_table;
    if (!gen_args.table.empty()) config.table_path = gen_args.table;
    if (!validate_args.table.empty()) config.table_path = validate_args.table;
  } catch (const usrep::io::MissingInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usrep::cli::kExitMissingInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return usrep::cli::kExitUsage;
  }

  if (*seg) return usrep::cli::cmd_segment(config, seg_args);
  if (*build) return usrep::cli::cmd_build_table(config, build_args);
  if (*validate) return usrep::cli::cmd_validate_table(config, validate_args);
  if (*gen) return usrep::cli::cmd_gen_dataset(config, gen_args);
  if (*stats) return usrep::cli::cmd_stats(config, stats_args);
  if (*eval) return usrep::cli::cmd_eval(config, eval_args);
  if (*diff) return usrep::cli::cmd_diff(config, diff_args);
  if (*serve) return Serve(config, serve_table, serve_corpus, serve_audit, serve_bind, serve_static);
  return usrep::cli::kExitUsage;
}
