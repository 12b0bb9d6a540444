#include <fmt/format.h>
#include <gtest/gtest.h>

#include <sstream>

#include "abstain/cli/commands.h"
#include "abstain/cli/config.h"
#include "abstain/core/record_io.h"
#include "abstain/error.h"
#include "abstain/dataset/pipeline.h"
#include "abstain/eval/evaluation.h"
#include "abstain/generation/prompts.h"
#include "stub_server.h"

namespace abstain {
namespace {

using testing::StubServer;
using testing::TempDir;
using testing::write_text;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = config_from_json(Json::parse(R"({
    "run_id": "r1", "seed": 9, "datasets": {"train_count": 3, "val_count": 1},
    "sampling": {"setting": "short_qa", "m": 4, "seed": 5},
    "model": {"base_url": "http://h/v1", "model_id": "base", "timeout_ms": 100},
    "entailment": {"nli_service": {"endpoint": "http://nli", "model_id": "d", "nli_separator": "\n"}}
  })"));
  EXPECT_EQ(c.run_id, "r1");
  EXPECT_EQ(c.ingest.seed, 9u);
  EXPECT_EQ(c.ingest.train_count, 3u);
  EXPECT_EQ(c.sampling.setting, Setting::kShortQa);
  EXPECT_EQ(c.sampling.m, 4u);
  EXPECT_EQ(c.sampling.seed, 5);
  EXPECT_EQ(c.model.timeout, std::chrono::milliseconds(100));
  EXPECT_EQ(c.thresholds.size(), 9u);
  const auto nli = c.backend("nli_service");
  EXPECT_EQ(nli.nli_separator, "\n");
  EXPECT_EQ(nli.cache_path, std::filesystem::path("out/r1/cache/entailment.nli_service.jsonl"));
  EXPECT_EQ(c.backend("mock_exact_match").kind, BackendKind::kMockExactMatch);
  EXPECT_THROW(c.backend("bogus"), ConfigError);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json(Json::parse(R"({"tau": 1.0})")), ConfigError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"sampling": {"setting": "mid"}})")), ConfigError);
  EXPECT_THROW(config_from_json(Json::parse(R"({"seed": "x"})")), ConfigError);

  auto c = config_from_json(Json::parse(R"({"thresholds": [0.5, 0.25]})"));
  EXPECT_THROW(c.validate(), ConfigError);
  c = config_from_json(Json::parse(R"({"abstention_phrase": "No idea."})"));
  EXPECT_THROW(c.validate(), ConfigError);
  c = config_from_json(Json::parse(R"({"sampling": {"m": 1}})"));
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, UnwritableOutputRootIsRejected) {
  TempDir dir;
  write_text(dir / "file", "x");
  PipelineConfig c;
  c.output_root = dir / "file" / "out";
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, EndpointNeedsABaseUrl) {
  EndpointConfig e;
  e.api_key_env = "ABSTAIN_TEST_UNSET_KEY";
  ::unsetenv("ABSTAIN_API_BASE");
  EXPECT_THROW(e.to_http(4), ConfigError);
  ::setenv("ABSTAIN_API_BASE", "http://127.0.0.1:9", 1);
  EXPECT_EQ(e.to_http(4).base_url, "http://127.0.0.1:9");
  ::unsetenv("ABSTAIN_API_BASE");
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"sample"}).code, kExitUsage);  // --split is required
  EXPECT_EQ(run({"--config", "/nonexistent/config.json", "aed", "--incorrect", "1", "--correct",
                 "1", "--total", "2"})
                .code,
            kExitUsage);
}

TEST(Cli, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("emit-sft"), std::string::npos);
}

TEST(Cli, AedFromCounts) {
  TempDir dir;
  const auto r = run({"--out", dir.path().string(), "aed", "--incorrect", "750", "--correct",
                      "1750", "--total", "2500"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("AED=0.3000"), std::string::npos);
  EXPECT_EQ(run({"--out", dir.path().string(), "aed", "--incorrect", "750"}).code, kExitUsage);
  EXPECT_EQ(run({"--out", dir.path().string(), "aed", "--incorrect", "5", "--correct", "5",
                 "--total", "6"})
                .code,
            kExitFailure);
}

TEST(Cli, IngestDryRunWritesNothing) {
  TempDir dir;
  std::string source;
  for (int i = 0; i < 10; ++i) source += fmt::format(R"({{"question":"Q{}?","answer":"A{}"}})" "\n", i, i);
  write_text(dir / "src.jsonl", source);
  const auto out = dir / "out";
  auto r = run({"--out", out.string(), "--dry-run", "ingest", "--source", (dir / "src.jsonl").string(),
                "--tag", "toy", "--train-count", "6", "--val-count", "2"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_FALSE(std::filesystem::exists(out / "default" / "questions"));

  r = run({"--out", out.string(), "ingest", "--source", (dir / "src.jsonl").string(), "--tag", "toy",
           "--train-count", "6", "--val-count", "2"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(load_records<QuestionRecord>(out / "default/questions/toy.train.jsonl").size(), 6u);
  EXPECT_EQ(load_records<QuestionRecord>(out / "default/questions/toy.validation.jsonl").size(), 2u);

  r = run({"--out", out.string(), "ingest", "--source", (dir / "src.jsonl").string(), "--tag", "toy",
           "--train-count", "9", "--val-count", "2"});
  EXPECT_EQ(r.code, kExitFailure);
}

TEST(Cli, PartialSamplingFailureExitsThreeUnlessAllowed) {
  TempDir dir;
  StubServer server([](const std::string&, const Json& body) -> testing::StubReply {
    if (testing::prompt_of(body).find("Broken?") != std::string::npos) return {400, "{}"};
    return testing::chat_reply("Paris");
  });
  std::vector<QuestionRecord> qs = {{"t:0", "Fine?", {"a"}, "t", Split::kTrain},
                                    {"t:1", "Broken?", {"b"}, "t", Split::kTrain}};
  store_records(dir / "split.jsonl", qs);
  write_text(dir / "config.json",
             Json{{"output_dir", (dir / "out").string()},
                  {"sampling", {{"m", 2}}},
                  {"model", {{"base_url", server.url()}, {"model_id", "stub"}, {"backoff_ms", 1}}}}
                 .dump());
  const std::vector<std::string> base = {"--config", (dir / "config.json").string()};

  auto args = base;
  args.insert(args.end(), {"--dry-run", "sample", "--split", (dir / "split.jsonl").string()});
  auto r = run(args);
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("planned requests: 6"), std::string::npos) << r.out;
  EXPECT_EQ(server.request_count(), 0u);

  args = base;
  args.insert(args.end(), {"sample", "--split", (dir / "split.jsonl").string()});
  r = run(args);
  EXPECT_EQ(r.code, kExitPartial) << r.err;
  const auto bundles = load_records<GenerationBundle>(dir / "out/default/bundles/split.long_qa.jsonl");
  ASSERT_EQ(bundles.size(), 1u);
  const auto report = Json::parse(
      testing::read_text(dir / "out/default/reports/sample.split.long_qa.failures.json"));
  EXPECT_EQ(report["failed"][0]["question_id"], "t:1");

  args = base;
  args.insert(args.end(), {"--allow-partial", "sample", "--split", (dir / "split.jsonl").string()});
  EXPECT_EQ(run(args).code, kExitOk);
}

TEST(Cli, AdaptationWritesCsv) {
  TempDir dir;
  std::vector<AedSummary> summaries = {
      {"tqa", 10, 5, 2, 3, compute_aed(2, 3, 10), "m", "long_qa", "semantic", 1.0},
      {"sciq", 10, 5, 4, 1, compute_aed(4, 1, 10), "m", "long_qa", "semantic", 1.0}};
  store_records(dir / "s.jsonl", summaries);
  const auto r = run({"--out", (dir / "out").string(), "adaptation", "--summaries",
                      (dir / "s.jsonl").string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(testing::read_text(dir / "out/default/reports/adaptation.csv"),
            "method,threshold,mean_incorrect,mean_correct,n_runs\n"
            "semantic,1.00,3.0000,2.0000,2\n");
}


// Two questions whose bundles give SE 0 and ln 2 under the mock backend.
struct ScoredFixture {
  TempDir dir;
  std::string questions;
  std::string bundles;
  std::string out;

  ScoredFixture() {
    std::vector<QuestionRecord> qs = {{"t:0", "Calm?", {"a"}, "t", Split::kTrain},
                                      {"t:1", "Torn?", {"b"}, "t", Split::kTrain}};
    std::vector<GenerationBundle> bs = {
        {"t:0", Setting::kLongQa, "Std 0", 0.1, {"Paris", "paris."}, 1.0, "m",
         prompt_hash(Setting::kLongQa, "Calm?")},
        {"t:1", Setting::kLongQa, "Std 1", 0.1, {"Paris", "Lyon"}, 1.0, "m",
         prompt_hash(Setting::kLongQa, "Torn?")}};
    questions = (dir / "q.jsonl").string();
    bundles = (dir / "b.jsonl").string();
    out = (dir / "out").string();
    store_records(questions, qs);
    store_records(bundles, bs);
  }
};

TEST(Cli, ScoreWithMockBackend) {
  ScoredFixture f;
  auto r = run({"--out", f.out, "--dry-run", "score", "--bundles", f.bundles, "--questions", f.questions,
                "--backend", "mock_exact_match"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_FALSE(std::filesystem::exists(f.dir / "out/default/entropy"));

  // Bundles were sampled with m = 2.
  r = run({"--out", f.out, "score", "--bundles", f.bundles, "--questions", f.questions, "--backend",
           "mock_exact_match"});
  EXPECT_EQ(r.code, kExitPartial);

  write_text(f.dir / "c.json", R"({"sampling": {"m": 2}})");
  r = run({"--config", (f.dir / "c.json").string(), "--out", f.out, "score", "--bundles", f.bundles,
           "--questions", f.questions, "--backend", "mock_exact_match"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const auto scores = load_records<EntropyScore>(f.dir / "out/default/entropy/b.mock_exact_match.jsonl");
  ASSERT_EQ(scores.size(), 2u);
  EXPECT_EQ(scores[0].semantic_entropy, 0.0);
  EXPECT_NEAR(scores[1].semantic_entropy, std::log(2.0), 1e-12);

  EXPECT_EQ(run({"--out", f.out, "score", "--bundles", f.bundles, "--questions", f.questions,
                 "--backend", "nope"})
                .code,
            kExitUsage);
}

TEST(Cli, PromptHashMismatchIsReported) {
  ScoredFixture f;
  std::vector<QuestionRecord> edited = {{"t:0", "Calm, edited?", {"a"}, "t", Split::kTrain},
                                        {"t:1", "Torn?", {"b"}, "t", Split::kTrain}};
  store_records(f.questions, edited);
  write_text(f.dir / "c.json", R"({"sampling": {"m": 2}})");
  const auto r = run({"--config", (f.dir / "c.json").string(), "--out", f.out, "--allow-partial",
                      "score", "--bundles", f.bundles, "--questions", f.questions, "--backend",
                      "mock_exact_match"});
  EXPECT_EQ(r.code, kExitOk);
  const auto report = Json::parse(
      testing::read_text(f.dir / "out/default/reports/score.b.mock_exact_match.failures.json"));
  EXPECT_EQ(report["count"], 1);
  EXPECT_NE(report["failed"][0]["reason"].get<std::string>().find("prompt_hash"), std::string::npos);
}

TEST(Cli, SweepEmitsOneSftFilePerThresholdAndPicksBest) {
  ScoredFixture f;
  std::vector<EntropyScore> scores = {{"t:0", std::log(2.0), 0.0, "mock_exact_match", 2},
                                      {"t:1", std::log(2.0), std::log(2.0), "mock_exact_match", 2}};
  store_records(f.dir / "e.jsonl", scores);
  auto r = run({"--out", f.out, "sweep", "--entropy", (f.dir / "e.jsonl").string(), "--bundles",
                f.bundles, "--questions", f.questions});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  for (double tau : threshold_grid()) {
    const auto rows = load_records<SftRecord>(
        f.dir / fmt::format("out/default/sft/e.tau{:.2f}.jsonl", tau));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].label, "Std 0");
    EXPECT_EQ(rows[1].label, tau < std::log(2.0) ? "I don't know the answer." : "Std 1");
  }

  std::vector<AedSummary> summaries;
  for (double tau : {0.25, 0.5, 0.75}) {
    const std::int64_t correct = tau == 0.25 ? 5 : 6;
    summaries.push_back({"t", 10, 8, 8 - correct, correct, compute_aed(8 - correct, correct, 10), "m",
                         "long_qa", "semantic", tau});
  }
  store_records(f.dir / "s.jsonl", summaries);
  r = run({"--out", f.out, "sweep", "--summaries", (f.dir / "s.jsonl").string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const auto best = Json::parse(testing::read_text(f.dir / "out/default/reports/best_threshold.json"));
  EXPECT_EQ(best["best_threshold"], 0.75);
}

TEST(Cli, EmitSftFromEntropyAndFromCorrectness) {
  ScoredFixture f;
  std::vector<EntropyScore> scores = {{"t:0", std::log(2.0), 0.0, "mock_exact_match", 2},
                                      {"t:1", std::log(2.0), std::log(2.0), "mock_exact_match", 2}};
  store_records(f.dir / "e.jsonl", scores);
  auto r = run({"--out", f.out, "emit-sft", "--entropy", (f.dir / "e.jsonl").string(), "--tau", "0.5",
                "--bundles", f.bundles, "--questions", f.questions});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  auto rows = load_records<SftRecord>(f.dir / "out/default/sft/e.tau0.50.jsonl");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].partition, PartitionSide::kHighEntropy);

  std::vector<EvalOutcome> outcomes = {{"t:0", "I don't know", true, std::nullopt, ""},
                                       {"t:1", "Std 1", false, true, "yes"}};
  store_records(f.dir / "ev.jsonl", outcomes);
  r = run({"--out", f.out, "emit-sft", "--mode", "correctness", "--eval", (f.dir / "ev.jsonl").string(),
           "--bundles", f.bundles, "--questions", f.questions});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  rows = load_records<SftRecord>(f.dir / "out/default/sft/ev.correctness.jsonl");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].label, "I don't know the answer.");
  EXPECT_EQ(rows[1].label, "Std 1");

  // Short-QA settings must not be mixed with long-QA bundles.
  r = run({"--out", f.out, "--setting", "short_qa", "emit-sft", "--entropy", (f.dir / "e.jsonl").string(),
           "--tau", "0.5", "--bundles", f.bundles, "--questions", f.questions});
  EXPECT_EQ(r.code, kExitUsage);
}


TEST(Cli, IngestSelectsTwoThousandAndFiveHundredReproducibly) {
  TempDir dir;
  std::string source;
  for (int i = 0; i < 2500; ++i) {
    source += fmt::format(R"({{"question":"Question number {}?","answers":["A{}"]}})" "\n", i, i);
  }
  write_text(dir / "src.jsonl", source);
  const auto ingest = [&](const std::string& out) {
    return run({"--out", out, "--seed", "17", "ingest", "--source", (dir / "src.jsonl").string(),
                "--tag", "big"});
  };
  ASSERT_EQ(ingest((dir / "a").string()).code, kExitOk);
  ASSERT_EQ(ingest((dir / "b").string()).code, kExitOk);
  const auto train = testing::read_text(dir / "a/default/questions/big.train.jsonl");
  const auto val = testing::read_text(dir / "a/default/questions/big.validation.jsonl");
  EXPECT_EQ(split_lines(train).size(), 2000u);
  EXPECT_EQ(split_lines(val).size(), 500u);
  EXPECT_EQ(train, testing::read_text(dir / "b/default/questions/big.train.jsonl"));
  EXPECT_EQ(val, testing::read_text(dir / "b/default/questions/big.validation.jsonl"));
}

std::string endpoint_config(const TempDir& dir, const std::string& url, int m = 2) {
  const auto path = dir / "config.json";
  write_text(path, Json{{"output_dir", (dir / "out").string()},
                        {"sampling", {{"m", m}, {"seed", 1}}},
                        {"model", {{"base_url", url}, {"model_id", "stub"}, {"backoff_ms", 1},
                                   {"max_retries", 1}, {"timeout_ms", 2000}}},
                        {"judge", {{"base_url", url}, {"model_id", "judge"}, {"backoff_ms", 1}}}}
                        .dump());
  return path.string();
}

TEST(Cli, UnreachableEndpointListsEveryQuestion) {
  TempDir dir;
  std::vector<QuestionRecord> qs = {{"t:0", "A?", {"a"}, "t", Split::kTrain},
                                    {"t:1", "B?", {"b"}, "t", Split::kTrain},
                                    {"t:2", "C?", {"c"}, "t", Split::kTrain}};
  store_records(dir / "split.jsonl", qs);
  const auto config = endpoint_config(dir, "http://127.0.0.1:1");
  const auto r = run({"--config", config, "sample", "--split", (dir / "split.jsonl").string()});
  EXPECT_EQ(r.code, kExitPartial);
  const auto report =
      Json::parse(testing::read_text(dir / "out/default/reports/sample.split.long_qa.failures.json"));
  ASSERT_EQ(report["failed"].size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(report["failed"][i]["question_id"], fmt::format("t:{}", i));
}

TEST(Cli, InterruptedSamplingResumesToTheSameBundles) {
  // Reference: one clean run.
  auto answer = [](const Json& body) {
    const auto prompt = testing::prompt_of(body);
    return testing::chat_reply(fmt::format("{} T={} seed {}", prompt.substr(prompt.rfind("Question:")),
                                           body.at("temperature").get<double>(), body.value("seed", -1)));
  };
  std::vector<QuestionRecord> qs;
  for (int i = 0; i < 6; ++i) {
    qs.push_back({fmt::format("t:{}", i), fmt::format("Q{}?", i), {"a"}, "t", Split::kTrain});
  }
  TempDir clean;
  {
    StubServer server([&](const std::string&, const Json& body) { return answer(body); });
    store_records(clean / "split.jsonl", qs);
    ASSERT_EQ(run({"--config", endpoint_config(clean, server.url(), 3), "sample", "--split",
                   (clean / "split.jsonl").string()})
                  .code,
              kExitOk);
  }

  // Interrupted: the endpoint dies after a few requests, then comes back.
  TempDir resumed;
  store_records(resumed / "split.jsonl", qs);
  std::atomic<int> served{0};
  std::size_t second_run_requests = 0;
  {
    StubServer flaky([&](const std::string&, const Json& body) -> testing::StubReply {
      if (++served > 9) return {503, "{}"};
      return answer(body);
    });
    const auto config = endpoint_config(resumed, flaky.url(), 3);
    EXPECT_EQ(run({"--config", config, "sample", "--split", (resumed / "split.jsonl").string()}).code,
              kExitPartial);
  }
  {
    StubServer healthy([&](const std::string&, const Json& body) { return answer(body); });
    const auto config = endpoint_config(resumed, healthy.url(), 3);
    EXPECT_EQ(run({"--config", config, "sample", "--split", (resumed / "split.jsonl").string()}).code,
              kExitOk);
    second_run_requests = healthy.request_count();
  }
  EXPECT_EQ(second_run_requests, 6u * 4u - 9u);
  EXPECT_EQ(testing::read_text(resumed / "out/default/bundles/split.long_qa.jsonl"),
            testing::read_text(clean / "out/default/bundles/split.long_qa.jsonl"));
}

TEST(Cli, ZeroThresholdOnZeroEntropyKeepsStandardResponses) {
  ScoredFixture f;
  std::vector<EntropyScore> scores = {{"t:0", 0.0, 0.0, "mock_exact_match", 2},
                                      {"t:1", 0.0, 0.0, "mock_exact_match", 2}};
  store_records(f.dir / "e.jsonl", scores);
  const auto r = run({"--out", f.out, "emit-sft", "--entropy", (f.dir / "e.jsonl").string(), "--tau",
                      "0", "--bundles", f.bundles, "--questions", f.questions});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const auto& row : load_records<SftRecord>(f.dir / "out/default/sft/e.tau0.00.jsonl")) {
    EXPECT_EQ(row.partition, PartitionSide::kLowEntropy);
    EXPECT_EQ(row.label, row.question_id == "t:0" ? "Std 0" : "Std 1");
  }
}

AedSummary evaluate_with(const std::string& model_reply, const std::string& judge_reply) {
  TempDir dir;
  StubServer server([&](const std::string&, const Json& body) {
    return testing::chat_reply(body.at("model") == "judge" ? judge_reply : model_reply);
  });
  std::vector<QuestionRecord> qs;
  for (int i = 0; i < 5; ++i) {
    qs.push_back({fmt::format("t:{}", i), fmt::format("Q{}?", i), {"a"}, "t", Split::kValidation});
  }
  store_records(dir / "val.jsonl", qs);
  const auto r = run({"--config", endpoint_config(dir, server.url()), "evaluate", "--split",
                      (dir / "val.jsonl").string(), "--name", "e"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  return load_records<AedSummary>(dir / "out/default/eval/e.aed.jsonl").at(0);
}

TEST(Cli, EvaluateAlwaysAbstainingModel) {
  const auto s = evaluate_with("I don't know the answer.", "unused");
  EXPECT_EQ(s.engaged, 0);
  EXPECT_NEAR(s.aed, 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Cli, EvaluateAlwaysCorrectModel) {
  const auto s = evaluate_with("a", "Yes");
  EXPECT_EQ(s.correct, 5);
  EXPECT_EQ(s.aed, 0.0);
  EXPECT_EQ(s.dataset_tag, "t");
  EXPECT_EQ(s.model_id, "stub");
}

}  // namespace
}  // namespace abstain
