#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cisc/records.hpp"
#include "cisc/synthetic.hpp"

using namespace cisc;

namespace {

std::vector<QuestionBundle> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dump(in);
}

const char* kLine0 =
    R"({"question_id":"q1","dataset_kind":"gsm8k","question_text":"x","gold_answer":"12","response_index":0,"response_text":"so 12. Proposed answer: (12)."})";
const char* kLine1 =
    R"({"question_id":"q1","dataset_kind":"gsm8k","question_text":"x","gold_answer":"12","response_index":1,"response_text":"Proposed answer: (13)."})";

}  // namespace

TEST(LoadDump, GroupsResponsesOfOneQuestion) {
  auto b = parse(std::string(kLine0) + "\n" + kLine1 + "\n");
  ASSERT_EQ(b.size(), 1u);
  ASSERT_EQ(b[0].responses.size(), 2u);
  EXPECT_EQ(*b[0].responses[0].canonical_answer, "12");
  EXPECT_EQ(*b[0].responses[1].canonical_answer, "13");
  EXPECT_TRUE(b[0].is_correct(b[0].responses[0]));
  EXPECT_FALSE(b[0].is_correct(b[0].responses[1]));
}

TEST(LoadDump, EmptyInputGivesNoBundles) { EXPECT_TRUE(parse("").empty()); }

TEST(LoadDump, MissingQuestionIdNamesTheLine) {
  try {
    parse(R"({"dataset_kind":"gsm8k","gold_answer":"1","response_index":0,"response_text":"t"})");
    FAIL() << "expected DumpError";
  } catch (const DumpError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("question_id"), std::string::npos);
  }
}

TEST(LoadDump, MalformedJsonReportsLine) {
  try {
    parse(std::string(kLine0) + "\n{not json\n");
    FAIL() << "expected DumpError";
  } catch (const DumpError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadDump, DuplicateResponseIndexRejected) {
  EXPECT_THROW(parse(std::string(kLine0) + "\n" + kLine0 + "\n"), DumpError);
}

TEST(LoadDump, ConflictingQuestionFieldsRejected) {
  std::string other = kLine1;
  other.replace(other.find("\"12\""), 4, "\"99\"");
  EXPECT_THROW(parse(std::string(kLine0) + "\n" + other + "\n"), DumpError);
}

TEST(LoadDump, InvalidSignalsAreFlaggedNotFatal) {
  auto b = parse(
      R"({"question_id":"q","dataset_kind":"generic","gold_answer":"a","response_index":0,"response_text":"none",)"
      R"("reasoning_logprobs":[{"token":"x","logprob":0.5}],"confidence_token_candidates":{"1":1.5}})");
  const auto& r = b[0].responses[0];
  EXPECT_FALSE(r.reasoning_logprobs);
  EXPECT_FALSE(r.confidence_token_candidates);
  EXPECT_TRUE(r.flags.count(std::string(flag::kInvalidLogprob)));
  EXPECT_TRUE(r.flags.count(std::string(flag::kInvalidCandidateProbability)));
  EXPECT_TRUE(r.flags.count(std::string(flag::kAnswerExtractionFailed)));
  EXPECT_EQ(r.vote_answer(), kSentinelAnswer);
}

TEST(LoadDump, DatasetKindOverride) {
  std::istringstream in(kLine0);
  LoadOptions opt;
  opt.dataset_kind = DatasetKind::math;
  EXPECT_EQ(parse_dump(in, opt)[0].dataset_kind, DatasetKind::math);
}

TEST(LoadDump, RoundTripsThroughWriter) {
  SyntheticSpec spec;
  spec.questions = 5;
  spec.responses_per_question = 7;
  for (auto kind : {DatasetKind::gsm8k, DatasetKind::math, DatasetKind::mmlu_pro}) {
    spec.kind = kind;
    auto original = make_synthetic_bundles(spec);
    original[0].responses[2].response_text = "garbled";
    derive_answer(original[0].responses[2], kind);
    std::ostringstream out;
    write_dump(out, original);
    std::istringstream in(out.str());
    EXPECT_EQ(parse_dump(in), original);
  }
}

TEST(ExtractAnswer, Examples) {
  EXPECT_EQ(extract_answer("...thus 12. Proposed answer: (B).", DatasetKind::mmlu_pro), "B");
  EXPECT_FALSE(extract_answer("no marker here", DatasetKind::gsm8k));
  EXPECT_EQ(extract_answer("Proposed answer: (3). Wait. Proposed answer: (5).", DatasetKind::gsm8k), "5");
  EXPECT_EQ(extract_answer("Proposed answer: 42", DatasetKind::gsm8k), "42");
  EXPECT_EQ(extract_answer("Proposed answer: ($f(x)$).", DatasetKind::math), "$f(x)$");
  EXPECT_FALSE(extract_answer("Proposed answer: ", DatasetKind::gsm8k));
}

TEST(ExtractAnswer, SingleMarkerFuzz) {
  std::mt19937 rng(7);
  const std::string alphabet = "abc XYZ 019.,;\n\t-+=";
  auto noise = [&](int len) {
    std::string s;
    for (int i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  for (int t = 0; t < 2000; ++t) {
    std::string payload = std::to_string(rng() % 100000);
    std::string text = noise(rng() % 40) + " Proposed answer: (" + payload + ")." + noise(rng() % 40);
    // The marker may not occur in the noise, so a second copy is impossible.
    ASSERT_EQ(extract_answer(text, DatasetKind::gsm8k), payload) << text;
  }
}

TEST(Canonicalize, Examples) {
  EXPECT_EQ(canonicalize_answer(" (b). ", DatasetKind::mmlu_pro), "B");
  EXPECT_EQ(canonicalize_answer("1,000.0", DatasetKind::gsm8k), "1000");
  EXPECT_EQ(canonicalize_answer("$\\sqrt{8}$", DatasetKind::math), "\\sqrt{8}");
  EXPECT_EQ(canonicalize_answer("007", DatasetKind::gsm8k), "7");
  EXPECT_EQ(canonicalize_answer("-0.50", DatasetKind::gsm8k), "-0.5");
  EXPECT_EQ(canonicalize_answer("$x  +   1$", DatasetKind::math), "x + 1");
  EXPECT_EQ(canonicalize_answer("(C) Paris", DatasetKind::bbh_options), "C");
  EXPECT_THROW(canonicalize_answer(" ( ). ", DatasetKind::gsm8k), std::invalid_argument);
}

TEST(Canonicalize, Idempotent) {
  std::mt19937 rng(11);
  const std::string alphabet = "0123456789.,()$ abAB-";
  const DatasetKind kinds[] = {DatasetKind::gsm8k, DatasetKind::math, DatasetKind::mmlu_pro, DatasetKind::bbh_options,
                               DatasetKind::bbh_free, DatasetKind::generic};
  int checked = 0;
  for (int t = 0; t < 20000; ++t) {
    std::string s;
    for (int i = 0, n = 1 + rng() % 10; i < n; ++i) s += alphabet[rng() % alphabet.size()];
    for (auto kind : kinds) {
      std::string once;
      try {
        once = canonicalize_answer(s, kind);
      } catch (const std::invalid_argument&) {
        continue;
      }
      ASSERT_EQ(canonicalize_answer(once, kind), once) << "input '" << s << "' kind " << to_string(kind);
      ++checked;
    }
  }
  EXPECT_GT(checked, 50000);
}

TEST(DeriveAnswer, FlagsFailures) {
  ResponseRecord r;
  r.response_text = "Proposed answer: ().";
  derive_answer(r, DatasetKind::gsm8k);
  EXPECT_EQ(r.vote_answer(), kSentinelAnswer);
  EXPECT_FALSE(r.flags.empty());
}
