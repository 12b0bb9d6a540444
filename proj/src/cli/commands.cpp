#include "abstain/cli/commands.h"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <map>
#include <optional>
#include <unordered_map>

#include "abstain/cli/config.h"
#include "abstain/core/parallel.h"
#include "abstain/core/record_io.h"
#include "abstain/dataset/pipeline.h"
#include "abstain/entailment/backends.h"
#include "abstain/entropy/entropy.h"
#include "abstain/error.h"
#include "abstain/eval/evaluation.h"
#include "abstain/eval/judge.h"
#include "abstain/generation/chat_client.h"
#include "abstain/generation/prompts.h"
#include "abstain/generation/sampler.h"

namespace abstain {

namespace {

namespace fs = std::filesystem;

struct Failure {
  std::string question_id;
  std::string reason;
};

// Flags shared by all subcommands.
struct GlobalOptions {
  std::string config_path;
  std::string out;
  std::string run_id;
  std::optional<std::uint64_t> seed;
  std::string setting;
  bool allow_partial = false;
  bool dry_run = false;
  bool verbose = false;
};

struct IngestOptionsCli {
  std::string source;
  std::string tag;
  std::vector<std::string> combine;
  std::optional<std::size_t> train_count;
  std::optional<std::size_t> val_count;
};

struct PartitionOptionsCli {
  std::string entropy;
  std::string eval;
  std::string partition;
  std::optional<double> tau;
  std::string mode = "entropy";
  double fraction = 0.5;
  std::string bundles;
  std::string questions;
  std::string name;
};

struct EvaluateOptionsCli {
  std::string split;
  std::string model_id;
  std::string model_url;
  std::string dataset;
  std::string method;
  std::optional<double> tau;
  std::string name;
};

struct SweepOptionsCli {
  std::string entropy;
  std::string bundles;
  std::string questions;
  std::vector<std::string> summaries;
  std::string csv;
};

struct AedOptionsCli {
  std::optional<std::int64_t> incorrect;
  std::optional<std::int64_t> correct;
  std::optional<std::int64_t> total;
  std::string eval;
};

class Runner {
 public:
  Runner(PipelineConfig config, GlobalOptions globals, std::ostream& out, std::ostream& err)
      : config_(std::move(config)), globals_(std::move(globals)), out_(out), err_(err) {}

  int ingest(const IngestOptionsCli& o);
  int sample(const std::string& split_path);
  int score(const std::string& bundles_path, const std::string& questions_path,
            const std::string& backend_kind);
  int partition(const PartitionOptionsCli& o);
  int emit_sft(const PartitionOptionsCli& o);
  int evaluate(const EvaluateOptionsCli& o);
  int sweep(const SweepOptionsCli& o);
  int adaptation(const SweepOptionsCli& o);
  int aed(const AedOptionsCli& o);

 private:
  int finish(const std::string& command, const std::string& name,
             const std::vector<Failure>& failures);
  Partition build_partition(const PartitionOptionsCli& o, std::string& name) const;
  std::vector<SftRecord> emit_rows(const Partition& partition, const std::string& bundles_path,
                                   const std::string& questions_path) const;
  CompletionCache& completion_cache();

  PipelineConfig config_;
  GlobalOptions globals_;
  std::ostream& out_;
  std::ostream& err_;
  std::unique_ptr<CompletionCache> completions_;
};

std::string tau_label(double tau) { return fmt::format("tau{:.2f}", tau); }

std::string file_stem(const std::string& path) { return fs::path(path).stem().string(); }

std::string sanitize(std::string text) {
  for (auto& c : text) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return text;
}

std::vector<std::string> ids_of(const std::vector<QuestionRecord>& questions) {
  std::vector<std::string> ids;
  for (const auto& q : questions) ids.push_back(q.id);
  return ids;
}

CompletionCache& Runner::completion_cache() {
  if (!completions_) {
    const auto path = config_.dir("cache") / "completions.jsonl";
    // A dry run reads an existing cache but never creates one.
    completions_ = globals_.dry_run && !fs::exists(path) ? std::make_unique<CompletionCache>()
                                                         : std::make_unique<CompletionCache>(path);
  }
  return *completions_;
}

int Runner::finish(const std::string& command, const std::string& name,
                   const std::vector<Failure>& failures) {
  Json report{{"command", command}, {"name", name}, {"count", failures.size()}};
  report["failed"] = Json::array();
  for (const auto& f : failures) {
    report["failed"].push_back(Json{{"question_id", f.question_id}, {"reason", f.reason}});
  }
  const auto path = config_.dir("reports") / (command + "." + name + ".failures.json");
  write_file_atomically(path, report.dump(2) + "\n");
  if (failures.empty()) return kExitOk;
  err_ << command << ": " << failures.size() << " question(s) failed; see " << path.string()
       << "\n";
  return globals_.allow_partial ? kExitOk : kExitPartial;
}

int Runner::ingest(const IngestOptionsCli& o) {
  if (!o.combine.empty()) {
    if (o.tag.empty()) throw ConfigError("--combine requires --tag for the output name");
    std::vector<std::vector<QuestionRecord>> parts;
    for (const auto& path : o.combine) parts.push_back(load_records<QuestionRecord>(path));
    const auto combined = combine(parts);
    const auto path = config_.dir("questions") / (o.tag + ".jsonl");
    if (globals_.dry_run) {
      out_ << "would write " << combined.size() << " records to " << path.string() << "\n";
      return kExitOk;
    }
    store_records(path, combined);
    out_ << "wrote " << combined.size() << " records to " << path.string() << "\n";
    return kExitOk;
  }
  if (o.source.empty() || o.tag.empty()) throw ConfigError("ingest needs --source and --tag");
  IngestOptions options = config_.ingest;
  if (o.train_count) options.train_count = *o.train_count;
  if (o.val_count) options.val_count = *o.val_count;
  const auto splits = abstain::ingest(o.source, o.tag, options);
  const auto train_path = config_.dir("questions") / (o.tag + ".train.jsonl");
  const auto val_path = config_.dir("questions") / (o.tag + ".validation.jsonl");
  if (globals_.dry_run) {
    out_ << "would write " << splits.train.size() << " train and " << splits.validation.size()
         << " validation records\n";
    return kExitOk;
  }
  store_records(train_path, splits.train);
  store_records(val_path, splits.validation);
  out_ << "wrote " << splits.train.size() << " records to " << train_path.string() << "\n";
  out_ << "wrote " << splits.validation.size() << " records to " << val_path.string() << "\n";
  return kExitOk;
}

int Runner::sample(const std::string& split_path) {
  const auto questions = load_records<QuestionRecord>(split_path);
  if (config_.model.model_id.empty()) throw ConfigError("model.model_id is not configured");
  const std::string name = file_stem(split_path) + "." + std::string(to_string(config_.sampling.setting));
  HttpChatClient chat(config_.model.to_http(config_.max_in_flight), config_.model.model_id);
  ResponseSampler sampler(chat, completion_cache(), config_.sampling);

  if (globals_.dry_run) {
    out_ << "planned requests: " << sampler.pending_requests(questions) << " ("
         << questions.size() << " questions x " << (1 + config_.sampling.m) << ")\n";
    return kExitOk;
  }
  auto report = sampler.sample_all(questions, config_.max_in_flight);
  const auto path = config_.dir("bundles") / (name + ".jsonl");
  store_records(path, report.bundles);
  out_ << "wrote " << report.bundles.size() << " bundles to " << path.string() << "\n";

  std::vector<Failure> failures;
  for (auto& f : report.failures) failures.push_back({f.question_id, f.reason});
  return finish("sample", name, failures);
}

int Runner::score(const std::string& bundles_path, const std::string& questions_path,
                  const std::string& backend_kind) {
  if (backend_kind.empty()) throw ConfigError("score needs --backend");
  const BackendConfig backend_config = config_.backend(backend_kind);
  const auto bundles = load_records<GenerationBundle>(bundles_path);
  const auto questions = load_records<QuestionRecord>(questions_path);
  std::unordered_map<std::string, const QuestionRecord*> by_id;
  for (const auto& q : questions) by_id.emplace(q.id, &q);
  const std::string name = file_stem(bundles_path) + "." + backend_kind;

  if (globals_.dry_run) {
    std::size_t pairs = 0;
    for (const auto& b : bundles) pairs += b.samples.size() * (b.samples.size() - 1);
    out_ << "bundles: " << bundles.size() << ", at most " << pairs
         << " entailment requests before caching\n";
    return kExitOk;
  }

  auto backend = make_backend(backend_config);
  const auto oracle = equivalence_oracle(*backend);
  std::vector<std::optional<EntropyScore>> scores(bundles.size());
  std::vector<std::string> errors(bundles.size());
  parallel_for(bundles.size(), config_.max_in_flight, [&](std::size_t i) {
    const auto& bundle = bundles[i];
    try {
      auto it = by_id.find(bundle.question_id);
      if (it == by_id.end()) throw ValidationError("no question record for " + bundle.question_id);
      const auto& question = it->second->question;
      if (prompt_hash(bundle.setting, question) != bundle.prompt_hash) {
        throw ValidationError("prompt_hash does not match the question text");
      }
      if (bundle.samples.size() != config_.sampling.m) {
        throw ValidationError(fmt::format("bundle has {} samples, configured m is {}",
                                          bundle.samples.size(), config_.sampling.m));
      }
      scores[i] = score_bundle(bundle, question, oracle, backend->id());
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::vector<EntropyScore> rows;
  std::vector<Failure> failures;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    if (scores[i]) {
      rows.push_back(*scores[i]);
    } else {
      failures.push_back({bundles[i].question_id, errors[i]});
    }
  }
  const auto path = config_.dir("entropy") / (name + ".jsonl");
  store_records(path, rows);
  out_ << "wrote " << rows.size() << " entropy scores to " << path.string() << "\n";
  return finish("score", name, failures);
}

Partition Runner::build_partition(const PartitionOptionsCli& o, std::string& name) const {
  if (!o.partition.empty()) {
    name = file_stem(o.partition);
    constexpr std::string_view kPrefix = "partition.";
    if (name.rfind(kPrefix, 0) == 0) name = name.substr(kPrefix.size());
    return Json::parse(read_file(o.partition)).get<Partition>();
  }
  const PartitionMode mode = parse_partition_mode(o.mode);
  if (mode == PartitionMode::kCorrectness) {
    if (o.eval.empty()) throw ConfigError("--mode correctness needs --eval");
    const auto outcomes = load_records<EvalOutcome>(o.eval);
    // An abstaining standard response counts as not correct.
    std::vector<std::pair<std::string, bool>> pairs;
    for (const auto& outcome : outcomes) {
      pairs.emplace_back(outcome.question_id, outcome.correct.value_or(false));
    }
    name = o.name.empty() ? file_stem(o.eval) + ".correctness" : o.name;
    if (!o.questions.empty()) {
      const auto ids = ids_of(load_records<QuestionRecord>(o.questions));
      return partition_by_correctness(pairs, ids);
    }
    return partition_by_correctness(pairs);
  }
  if (o.entropy.empty()) throw ConfigError("entropy partitioning needs --entropy");
  const auto scores = load_records<EntropyScore>(o.entropy);
  if (mode == PartitionMode::kQuantile) {
    name = o.name.empty() ? fmt::format("{}.quantile{:.2f}", file_stem(o.entropy), o.fraction) : o.name;
    return partition_by_quantile(scores, o.fraction);
  }
  if (!o.tau) throw ConfigError("entropy partitioning needs --tau");
  name = o.name.empty() ? file_stem(o.entropy) + "." + tau_label(*o.tau) : o.name;
  return partition_by_entropy(scores, *o.tau);
}

std::vector<SftRecord> Runner::emit_rows(const Partition& partition,
                                         const std::string& bundles_path,
                                         const std::string& questions_path) const {
  if (bundles_path.empty() || questions_path.empty()) {
    throw ConfigError("emitting SFT rows needs --bundles and --questions");
  }
  const auto bundles = load_records<GenerationBundle>(bundles_path);
  const auto questions = load_records<QuestionRecord>(questions_path);
  for (const auto& b : bundles) {
    if (b.setting != config_.sampling.setting) {
      throw ConfigError("bundle " + b.question_id + " was sampled under " +
                        std::string(to_string(b.setting)) + " but the setting is " +
                        std::string(to_string(config_.sampling.setting)));
    }
  }
  return abstain::emit_sft(partition, bundles, questions, config_.sampling.setting,
                           config_.abstention_phrase);
}

int Runner::partition(const PartitionOptionsCli& o) {
  std::string name;
  const auto p = build_partition(o, name);
  const auto path = config_.dir("reports") / ("partition." + name + ".json");
  out_ << "H=" << p.high_ids.size() << " L=" << p.low_ids.size() << "\n";
  if (globals_.dry_run) return kExitOk;
  Json j = p;
  write_file_atomically(path, j.dump(2) + "\n");
  out_ << "wrote " << path.string() << "\n";
  return kExitOk;
}

int Runner::emit_sft(const PartitionOptionsCli& o) {
  std::string name;
  const auto p = build_partition(o, name);
  const auto rows = emit_rows(p, o.bundles, o.questions);
  const auto path = config_.dir("sft") / (name + ".jsonl");
  if (globals_.dry_run) {
    out_ << "would write " << rows.size() << " SFT rows to " << path.string() << "\n";
    return kExitOk;
  }
  store_records(path, rows);
  out_ << "wrote " << rows.size() << " SFT rows (H=" << p.high_ids.size()
       << ", L=" << p.low_ids.size() << ") to " << path.string() << "\n";
  return kExitOk;
}

int Runner::evaluate(const EvaluateOptionsCli& o) {
  if (o.split.empty()) throw ConfigError("evaluate needs --split");
  const auto questions = load_records<QuestionRecord>(o.split);
  if (questions.empty()) throw ValidationError("evaluate: split " + o.split + " is empty");
  EndpointConfig model = config_.model;
  if (!o.model_id.empty()) model.model_id = o.model_id;
  if (!o.model_url.empty()) model.base_url = o.model_url;
  if (model.model_id.empty()) throw ConfigError("no model id for evaluation");
  if (config_.judge.model_id.empty()) throw ConfigError("judge.model_id is not configured");

  const std::string name =
      o.name.empty() ? file_stem(o.split) + "." + sanitize(model.model_id) + "." +
                           std::string(to_string(config_.sampling.setting))
                     : o.name;
  HttpChatClient model_chat(model.to_http(config_.max_in_flight), model.model_id);
  HttpChatClient judge_chat(config_.judge.to_http(config_.max_in_flight), config_.judge.model_id);
  ResponseSampler sampler(model_chat, completion_cache(), config_.sampling);

  if (globals_.dry_run) {
    out_ << "planned requests: at most " << 2 * questions.size() << " (" << questions.size()
         << " greedy generations + judge calls for non-abstaining answers)\n";
    return kExitOk;
  }

  ModelEvaluator evaluator(sampler, judge_chat, completion_cache(), config_.abstention_stem);
  auto run = evaluator.evaluate(questions, config_.max_in_flight);

  std::string dataset = o.dataset;
  if (dataset.empty()) {
    dataset = questions.front().dataset;
    for (const auto& q : questions) {
      if (q.dataset != dataset) {
        dataset = "mult";
        break;
      }
    }
  }
  AedSummary summary = tally(run.outcomes, static_cast<std::int64_t>(questions.size()));
  summary.dataset_tag = dataset;
  summary.model_id = model.model_id;
  summary.setting = std::string(to_string(config_.sampling.setting));
  summary.method = o.method;
  summary.threshold = o.tau;

  const auto eval_path = config_.dir("eval") / (name + ".jsonl");
  const auto aed_path = config_.dir("eval") / (name + ".aed.jsonl");
  store_records(eval_path, run.outcomes);
  store_records(aed_path, std::vector<AedSummary>{summary});
  out_ << fmt::format("|D|={} Q={} I={} C={} AED={:.4f}\n", summary.total, summary.engaged,
                      summary.incorrect, summary.correct, summary.aed);
  out_ << "wrote " << eval_path.string() << " and " << aed_path.string() << "\n";

  std::vector<Failure> failures;
  for (auto& f : run.failures) failures.push_back({f.question_id, f.reason});
  return finish("evaluate", name, failures);
}

std::vector<AedSummary> load_summaries(const std::vector<std::string>& paths) {
  std::vector<AedSummary> all;
  for (const auto& path : paths) {
    auto part = load_records<AedSummary>(path);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

int Runner::sweep(const SweepOptionsCli& o) {
  if (o.entropy.empty() && o.summaries.empty()) {
    throw ConfigError("sweep needs --entropy (to emit SFT files) and/or --summaries");
  }
  if (!o.entropy.empty()) {
    for (double tau : config_.thresholds) {
      PartitionOptionsCli p;
      p.entropy = o.entropy;
      p.tau = tau;
      std::string name;
      const auto partition = build_partition(p, name);
      const auto rows = emit_rows(partition, o.bundles, o.questions);
      const auto path = config_.dir("sft") / (name + ".jsonl");
      if (!globals_.dry_run) store_records(path, rows);
      out_ << fmt::format("tau={:.2f} H={} L={} -> {}\n", tau, partition.high_ids.size(),
                          partition.low_ids.size(), path.string());
    }
  }
  if (!o.summaries.empty()) {
    std::map<double, AedSummary> by_threshold;
    for (const auto& s : load_summaries(o.summaries)) {
      if (!s.threshold) throw ValidationError("sweep: summary without a threshold");
      if (!by_threshold.emplace(*s.threshold, s).second) {
        throw ValidationError(fmt::format("sweep: two summaries for tau={}", *s.threshold));
      }
    }
    const double best = select_best_threshold(by_threshold);
    Json report{{"best_threshold", best}, {"aed", by_threshold.at(best).aed}};
    report["candidates"] = Json::array();
    for (const auto& [tau, s] : by_threshold) {
      report["candidates"].push_back(Json{{"threshold", tau}, {"aed", s.aed}});
    }
    const auto path = config_.dir("reports") / "best_threshold.json";
    if (!globals_.dry_run) write_file_atomically(path, report.dump(2) + "\n");
    out_ << fmt::format("best tau={:.2f} AED={:.4f}\n", best, by_threshold.at(best).aed);
  }
  return kExitOk;
}

int Runner::adaptation(const SweepOptionsCli& o) {
  if (o.summaries.empty()) throw ConfigError("adaptation needs --summaries");
  std::vector<AdaptationResult> results;
  for (const auto& s : load_summaries(o.summaries)) {
    if (!s.threshold) throw ValidationError("adaptation: summary without a threshold");
    results.push_back({s.method, *s.threshold, s.dataset_tag, static_cast<double>(s.incorrect),
                       static_cast<double>(s.correct)});
  }
  const auto rows = adaptation_table(results);
  const std::string csv = adaptation_csv(rows);
  const fs::path path = o.csv.empty() ? config_.dir("reports") / "adaptation.csv" : fs::path(o.csv);
  if (!globals_.dry_run) write_file_atomically(path, csv);
  out_ << csv;
  return kExitOk;
}

int Runner::aed(const AedOptionsCli& o) {
  std::int64_t incorrect = 0;
  std::int64_t correct = 0;
  std::int64_t total = 0;
  if (!o.eval.empty()) {
    const auto outcomes = load_records<EvalOutcome>(o.eval);
    total = o.total.value_or(static_cast<std::int64_t>(outcomes.size()));
    const auto s = tally(outcomes, total);
    incorrect = s.incorrect;
    correct = s.correct;
  } else {
    if (!o.incorrect || !o.correct || !o.total) {
      throw ConfigError("aed needs --eval or all of --incorrect, --correct, --total");
    }
    incorrect = *o.incorrect;
    correct = *o.correct;
    total = *o.total;
  }
  const double value = compute_aed(incorrect, correct, total);
  out_ << fmt::format("|D|={} Q={} I={} C={} AED={:.4f}\n", total, incorrect + correct, incorrect,
                      correct, value);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic-entropy abstention fine-tuning pipeline"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--out", g.out, "Output root directory (overrides output_dir)");
  app.add_option("--run-id", g.run_id, "Run id (overrides run_id)");
  app.add_option("--seed", g.seed, "Seed for dataset selection");
  app.add_option("--setting", g.setting, "Answering setting: long_qa or short_qa");
  app.add_flag("--allow-partial", g.allow_partial, "Exit 0 even if some questions failed");
  app.add_flag("--dry-run", g.dry_run, "Validate and count planned requests; no network, no writes");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging (request bodies, secrets redacted)");

  IngestOptionsCli ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Select train/validation splits from a QA source");
  ingest_cmd->add_option("--source", ingest.source, "Raw QA source, one JSON object per line");
  ingest_cmd->add_option("--tag", ingest.tag, "Dataset tag used in ids and file names");
  ingest_cmd->add_option("--combine", ingest.combine, "Concatenate existing split files instead");
  ingest_cmd->add_option("--train-count", ingest.train_count);
  ingest_cmd->add_option("--val-count", ingest.val_count);

  std::string split_path;
  auto* sample_cmd = app.add_subcommand("sample", "Sample standard and high-temperature responses");
  sample_cmd->add_option("--split", split_path, "Question split file")->required();

  std::string bundles_path;
  std::string questions_path;
  std::string backend;
  auto* score_cmd = app.add_subcommand("score", "Compute classical and semantic entropy");
  score_cmd->add_option("--bundles", bundles_path)->required();
  score_cmd->add_option("--questions", questions_path)->required();
  score_cmd->add_option("--backend", backend, "nli_service, llm_icl or mock_exact_match")->required();

  PartitionOptionsCli part;
  auto add_partition_flags = [&part](CLI::App* cmd) {
    cmd->add_option("--entropy", part.entropy, "Entropy score file");
    cmd->add_option("--tau", part.tau, "Threshold in nats");
    cmd->add_option("--mode", part.mode, "entropy, correctness or quantile");
    cmd->add_option("--eval", part.eval, "Eval file of judged standard responses (correctness)");
    cmd->add_option("--fraction", part.fraction, "Abstain fraction for quantile mode");
    cmd->add_option("--questions", part.questions, "Question split file");
    cmd->add_option("--name", part.name, "Output name (default derived from inputs)");
  };
  auto* partition_cmd = app.add_subcommand("partition", "Split questions into H and L");
  add_partition_flags(partition_cmd);
  auto* emit_cmd = app.add_subcommand("emit-sft", "Write the SFT dataset for a partition");
  add_partition_flags(emit_cmd);
  emit_cmd->add_option("--partition", part.partition, "Partition file from `partition`");
  emit_cmd->add_option("--bundles", part.bundles, "Bundle file")->required();

  EvaluateOptionsCli eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Greedy-decode, judge and compute AED");
  eval_cmd->add_option("--split", eval.split)->required();
  eval_cmd->add_option("--model-id", eval.model_id, "Model under test (overrides model.model_id)");
  eval_cmd->add_option("--model-url", eval.model_url, "Endpoint of the model under test");
  eval_cmd->add_option("--dataset", eval.dataset, "Dataset tag for the summary");
  eval_cmd->add_option("--method", eval.method, "Method label for the summary");
  eval_cmd->add_option("--tau", eval.tau, "Training threshold label for the summary");
  eval_cmd->add_option("--name", eval.name, "Output name");

  SweepOptionsCli sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Emit SFT files over the threshold grid; pick best tau");
  sweep_cmd->add_option("--entropy", sweep.entropy);
  sweep_cmd->add_option("--bundles", sweep.bundles);
  sweep_cmd->add_option("--questions", sweep.questions);
  sweep_cmd->add_option("--summaries", sweep.summaries, "AED summary files, one per threshold");
  auto* adapt_cmd = app.add_subcommand("adaptation", "Average (I, C) per method and threshold");
  adapt_cmd->add_option("--summaries", sweep.summaries)->required();
  adapt_cmd->add_option("--csv", sweep.csv, "Output CSV path");

  AedOptionsCli aed;
  auto* aed_cmd = app.add_subcommand("aed", "Accuracy-engagement distance from counts or an eval file");
  aed_cmd->add_option("--incorrect", aed.incorrect);
  aed_cmd->add_option("--correct", aed.correct);
  aed_cmd->add_option("--total", aed.total);
  aed_cmd->add_option("--eval", aed.eval);

  std::vector<std::string> argv_storage{"abstain"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    PipelineConfig config = g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
    if (!g.out.empty()) config.output_root = g.out;
    if (!g.run_id.empty()) config.run_id = g.run_id;
    if (g.seed) config.seed = config.ingest.seed = *g.seed;
    if (!g.setting.empty()) config.sampling.setting = parse_setting(g.setting);
    config.validate();
    if (*score_cmd) parse_backend_kind(backend);

    Runner runner(std::move(config), g, out, err);
    if (*ingest_cmd) return runner.ingest(ingest);
    if (*sample_cmd) return runner.sample(split_path);
    if (*score_cmd) return runner.score(bundles_path, questions_path, backend);
    if (*partition_cmd) return runner.partition(part);
    if (*emit_cmd) return runner.emit_sft(part);
    if (*eval_cmd) return runner.evaluate(eval);
    if (*sweep_cmd) return runner.sweep(sweep);
    if (*adapt_cmd) return runner.adaptation(sweep);
    if (*aed_cmd) return runner.aed(aed);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace abstain
