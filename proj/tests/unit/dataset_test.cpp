#include <gtest/gtest.h>

#include <random>
#include <set>

#include "abstain/core/record_io.h"
#include "abstain/dataset/pipeline.h"
#include "abstain/error.h"
#include "abstain/generation/prompts.h"
#include "stub_server.h"

namespace abstain {
namespace {

using testing::TempDir;
using testing::write_text;

std::vector<QuestionRecord> make_pool(std::size_t n) {
  std::vector<QuestionRecord> pool;
  for (std::size_t i = 0; i < n; ++i) {
    pool.push_back({"p:" + std::to_string(i), "Question " + std::to_string(i) + "?",
                    {"A" + std::to_string(i)}, "p", Split::kFull});
  }
  return pool;
}

EntropyScore score(const std::string& id, double se) {
  return EntropyScore{id, std::log(10.0), se, "mock_exact_match", 10};
}

TEST(ReadSource, AcceptsCommonAnswerShapes) {
  TempDir dir;
  write_text(dir / "src.jsonl",
             R"({"question":"Q0?","answer":"A0"})" "\n"
             R"({"question":"  Q1?  ","answers":["A1","B1"],"context":"ignored"})" "\n"
             R"({"question":"Q2?","answer":{"value":"A2","aliases":["a2","A2"]}})" "\n"
             R"({"question":"Q3?","answers":{"text":["A3"]}})" "\n");
  const auto records = read_source(dir / "src.jsonl", "tqa");
  ASSERT_EQ(records.size(), 4u);
  EXPECT_EQ(records[0].id, "tqa:0");
  EXPECT_EQ(records[0].gold_answers, std::vector<std::string>{"A0"});
  EXPECT_EQ(records[1].question, "Q1?");
  EXPECT_EQ(records[1].gold_answers, (std::vector<std::string>{"A1", "B1"}));
  EXPECT_EQ(records[2].gold_answers, (std::vector<std::string>{"a2", "A2"}));
  EXPECT_EQ(records[3].gold_answers, std::vector<std::string>{"A3"});
  for (const auto& r : records) {
    EXPECT_EQ(r.dataset, "tqa");
    EXPECT_NO_THROW(validate(r));
  }
}

TEST(ReadSource, SkipsUnusableAndDuplicateRowsKeepingSourceIndices) {
  TempDir dir;
  write_text(dir / "src.jsonl",
             R"({"question":"Q0?","answer":"A"})" "\n"
             R"({"question":"   ","answer":"A"})" "\n"
             R"({"question":"Q2?","answers":[]})" "\n"
             R"({"question":"Q0?","answer":"B"})" "\n"
             R"({"question":"Q4?","answer":"C"})" "\n");
  const auto records = read_source(dir / "src.jsonl", "d");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].id, "d:0");
  EXPECT_EQ(records[1].id, "d:4");
}

TEST(ReadSource, MalformedRowIsARecordError) {
  TempDir dir;
  write_text(dir / "src.jsonl", R"({"question":"Q0?","answer":"A"})" "\n" R"({"q":1})" "\n");
  try {
    read_source(dir / "src.jsonl", "d");
    FAIL();
  } catch (const RecordError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(SelectSplits, DisjointSizedDeterministicAndInPoolOrder) {
  const auto pool = make_pool(100);
  IngestOptions options{30, 10, 5};
  const auto a = select_splits(pool, options);
  const auto b = select_splits(pool, options);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  ASSERT_EQ(a.train.size(), 30u);
  ASSERT_EQ(a.validation.size(), 10u);
  std::set<std::string> ids;
  for (const auto& r : a.train) {
    EXPECT_EQ(r.split, Split::kTrain);
    ids.insert(r.id);
  }
  for (const auto& r : a.validation) {
    EXPECT_EQ(r.split, Split::kValidation);
    ids.insert(r.id);
  }
  EXPECT_EQ(ids.size(), 40u);
  auto index = [](const QuestionRecord& r) { return std::stoul(r.id.substr(2)); };
  for (std::size_t i = 1; i < a.train.size(); ++i) EXPECT_LT(index(a.train[i - 1]), index(a.train[i]));

  const auto c = select_splits(pool, IngestOptions{30, 10, 6});
  EXPECT_NE(a.train, c.train);
}

TEST(SelectSplits, SelectionIsRoughlyUniform) {
  // Each of 20 items should be chosen about half the time over many seeds.
  const auto pool = make_pool(20);
  std::vector<int> hits(20, 0);
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto s = select_splits(pool, IngestOptions{8, 2, seed});
    for (const auto& r : s.train) ++hits[std::stoul(r.id.substr(2))];
    for (const auto& r : s.validation) ++hits[std::stoul(r.id.substr(2))];
  }
  for (int h : hits) {
    EXPECT_GT(h, 850);
    EXPECT_LT(h, 1150);
  }
}

TEST(SelectSplits, TooSmallPoolIsAnError) {
  EXPECT_THROW(select_splits(make_pool(5), IngestOptions{4, 2, 0}), ValidationError);
}

TEST(Combine, ConcatenatesAndRejectsCollisions) {
  const auto pool = make_pool(4);
  std::vector<std::vector<QuestionRecord>> parts = {{pool[0], pool[1]}, {pool[2]}};
  const auto combined = combine(parts);
  ASSERT_EQ(combined.size(), 3u);
  EXPECT_EQ(combined[2].id, "p:2");
  parts.push_back({pool[0]});
  EXPECT_THROW(combine(parts), ValidationError);
}

TEST(Partition, BoundaryGoesToLow) {
  std::vector<EntropyScore> scores = {score("a", 0.0), score("b", 1.0), score("c", 1.0000001)};
  const auto p = partition_by_entropy(scores, 1.0);
  EXPECT_EQ(p.high_ids, std::set<std::string>{"c"});
  EXPECT_EQ(p.low_ids, (std::set<std::string>{"a", "b"}));
  EXPECT_EQ(p.threshold, 1.0);
}

TEST(Partition, RandomizedLaws) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> se(0.0, std::log(10.0));
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EntropyScore> scores;
    for (int i = 0; i < 30; ++i) {
      // Some scores land exactly on grid points.
      const double v = i % 5 == 0 ? 0.25 * (i % 10) : se(rng);
      scores.push_back(score("q" + std::to_string(i), v));
    }
    std::set<std::string> previous_high;
    bool first = true;
    for (double tau : threshold_grid()) {
      const auto p = partition_by_entropy(scores, tau);
      EXPECT_EQ(p.high_ids.size() + p.low_ids.size(), scores.size());
      for (const auto& s : scores) {
        EXPECT_NE(p.high_ids.count(s.question_id), p.low_ids.count(s.question_id));
      }
      if (!first) {
        // Raising tau only shrinks H.
        EXPECT_TRUE(std::includes(previous_high.begin(), previous_high.end(), p.high_ids.begin(),
                                  p.high_ids.end()));
      }
      previous_high = p.high_ids;
      first = false;
    }
  }
}

TEST(Partition, RejectsDuplicatesAndNegativeThreshold) {
  std::vector<EntropyScore> dup = {score("a", 0.1), score("a", 0.2)};
  EXPECT_THROW(partition_by_entropy(dup, 1.0), ValidationError);
  EXPECT_THROW(partition_by_entropy(std::vector<EntropyScore>{}, -0.1), ValidationError);
}

TEST(Partition, CorrectnessMode) {
  std::vector<std::pair<std::string, bool>> outcomes = {{"a", true}, {"b", false}};
  const auto p = partition_by_correctness(outcomes);
  EXPECT_EQ(p.high_ids, std::set<std::string>{"b"});
  EXPECT_EQ(p.low_ids, std::set<std::string>{"a"});
  EXPECT_FALSE(p.threshold);
  std::vector<std::string> expected = {"a", "b", "c"};
  EXPECT_THROW(partition_by_correctness(outcomes, expected), ValidationError);
}

TEST(Partition, QuantileModeUsesFloorAndBreaksTiesById) {
  std::vector<EntropyScore> scores = {score("d", 0.5), score("a", 2.0), score("c", 0.5),
                                      score("b", 1.0), score("e", 0.0)};
  const auto p = partition_by_quantile(scores, 0.5);  // floor(2.5) = 2
  EXPECT_EQ(p.high_ids, (std::set<std::string>{"a", "b"}));
  const auto p3 = partition_by_quantile(scores, 0.6);  // 3: tie at 0.5 resolved to "c"
  EXPECT_EQ(p3.high_ids, (std::set<std::string>{"a", "b", "c"}));
  EXPECT_THROW(partition_by_quantile(scores, 1.5), ValidationError);
}

TEST(Partition, JsonRoundTrip) {
  std::vector<EntropyScore> scores = {score("a", 0.1), score("b", 2.0)};
  const auto p = partition_by_entropy(scores, 0.5);
  Json j = p;
  EXPECT_EQ(j.get<Partition>(), p);
  j["low_ids"].push_back("b");
  EXPECT_THROW(j.get<Partition>(), ValidationError);
}

TEST(EmitSft, LabelsFollowPartitionAndRowsAreSortedById) {
  std::vector<QuestionRecord> questions = {{"z", "Qz?", {"a"}, "d", Split::kTrain},
                                           {"a", "Qa?", {"a"}, "d", Split::kTrain}};
  std::vector<GenerationBundle> bundles = {
      {"z", Setting::kShortQa, "Std z", 0.1, {"s"}, 1.0, "m", "h"},
      {"a", Setting::kShortQa, "Std a", 0.1, {"s"}, 1.0, "m", "h"}};
  Partition p;
  p.high_ids = {"z"};
  p.low_ids = {"a"};
  const auto rows = emit_sft(p, bundles, questions, Setting::kShortQa);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].question_id, "a");
  EXPECT_EQ(rows[0].label, "Std a");
  EXPECT_EQ(rows[0].partition, PartitionSide::kLowEntropy);
  EXPECT_EQ(rows[0].prompt, render_prompt(Setting::kShortQa, "Qa?"));
  EXPECT_EQ(rows[1].label, "I don't know the answer.");
  EXPECT_EQ(rows[1].partition, PartitionSide::kHighEntropy);

  const auto custom = emit_sft(p, bundles, questions, Setting::kShortQa, "Unsure.");
  EXPECT_EQ(custom[1].label, "Unsure.");
}

TEST(EmitSft, MissingInputsAreErrors) {
  Partition p;
  p.low_ids = {"a"};
  std::vector<QuestionRecord> questions = {{"a", "Qa?", {"a"}, "d", Split::kTrain}};
  EXPECT_THROW(emit_sft(p, std::vector<GenerationBundle>{}, questions, Setting::kLongQa),
               ValidationError);
}

TEST(ThresholdGrid, NineQuarterSteps) {
  const auto grid = threshold_grid();
  ASSERT_EQ(grid.size(), 9u);
  for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_EQ(grid[k], 0.25 * (k + 1));
}

}  // namespace
}  // namespace abstain
