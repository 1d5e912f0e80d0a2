#include <doctest.h>

#include <random>

#include "error.hpp"
#include "scores.hpp"
#include "testutil.hpp"

using namespace cmest;

TEST_CASE("csv ingestion") {
  SUBCASE("labelled rows parse in order") {
    ScoreSet set = parse_scores_csv("id,score,label\na,0.9,1\nb,0.2,0\n", "mem", 0.5);
    REQUIRE(set.size() == 2);
    CHECK(set.records[0].id == "a");
    CHECK(set.records[0].raw_score == 0.9);
    CHECK(*set.records[0].label == 1);
    CHECK(set.records[1].id == "b");
    CHECK(set.labelled());
  }
  SUBCASE("score out of range names the line") {
    CHECK_THROWS_WITH_AS(parse_scores_csv("id,score\na,0.5\nb,1.5\n", "mem", 0.5),
                         doctest::Contains("mem:3"), Error);
  }
  SUBCASE("column order free, extras ignored") {
    ScoreSet set = parse_scores_csv(
        "extra,label,score,id\nx,1,0.75,q\ny,0,0.25,r\n", "mem", 0.5);
    CHECK(set.records[0].id == "q");
    CHECK(set.records[0].raw_score == 0.75);
    CHECK(*set.records[1].label == 0);
  }
  SUBCASE("crlf and blank lines accepted") {
    ScoreSet set = parse_scores_csv("id,score\r\na,0.5\r\n\r\n", "mem", 0.5);
    CHECK(set.size() == 1);
  }
  SUBCASE("header required") {
    CHECK_THROWS_AS(parse_scores_csv("a,0.5\nb,0.7\n", "mem", 0.5), Error);
  }
  SUBCASE("field count mismatch names the line") {
    CHECK_THROWS_WITH_AS(parse_scores_csv("id,score\na,0.5,9\n", "mem", 0.5),
                         doctest::Contains("mem:2"), Error);
  }
  SUBCASE("bad label rejected") {
    CHECK_THROWS_AS(parse_scores_csv("id,score,label\na,0.5,2\n", "mem", 0.5),
                    Error);
  }
  SUBCASE("empty file rejected") {
    CHECK_THROWS_AS(parse_scores_csv("", "mem", 0.5), Error);
    CHECK_THROWS_AS(parse_scores_csv("id,score\n", "mem", 0.5), Error);
  }
  SUBCASE("group column kept") {
    ScoreSet set =
        parse_scores_csv("id,score,group\na,0.5,minority\nb,0.5,\n", "mem", 0.5);
    CHECK(*set.records[0].group == "minority");
    CHECK(!set.records[1].group);
  }
}

TEST_CASE("jsonl ingestion") {
  ScoreSet set = parse_scores_jsonl(R"({"id":"a","score":0.7})" "\n", "mem", 0.5);
  REQUIRE(set.size() == 1);
  CHECK(set.records[0].raw_score == 0.7);
  CHECK(!set.records[0].label);
  CHECK(!set.labelled());

  CHECK_THROWS_WITH_AS(
      parse_scores_jsonl("{\"id\":\"a\",\"score\":0.7}\nnot json\n", "mem", 0.5),
      doctest::Contains("mem:2"), Error);
  CHECK_THROWS_AS(parse_scores_jsonl(R"({"id":"a","score":1.2})", "mem", 0.5),
                  Error);
  CHECK_THROWS_AS(parse_scores_jsonl(R"({"score":0.2})", "mem", 0.5), Error);
}

TEST_CASE("csv round trip keeps full precision and optional columns") {
  std::mt19937 rng(7);
  ScoreSet set = testutil::random_set(rng, 50);
  set.records[3].group = "minority";
  const std::string text = scores_to_csv(set);
  ScoreSet back = parse_scores_csv(text, "mem", set.threshold);
  REQUIRE(back.size() == set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    CHECK(back.records[i].raw_score == set.records[i].raw_score);
    CHECK(back.records[i].label == set.records[i].label);
    CHECK(back.records[i].group == set.records[i].group);
  }
}

TEST_CASE("predicted confidence") {
  CHECK(predicted_confidence(0.9, 0.5) == 0.9);
  CHECK(predicted_confidence(0.2, 0.5) == 0.8);
  // Boundary score counts as a positive prediction.
  CHECK(predicted_confidence(0.5, 0.5) == 0.5);
}

TEST_CASE("split predictions") {
  ScoreSet set;
  set.threshold = 0.5;
  for (double s : {0.9, 0.4, 0.5}) set.records.push_back({"x", s, {}, {}});
  PredictionSplit split = split_predictions(set);
  REQUIRE(split.n_pos() == 2);
  REQUIRE(split.n_neg() == 1);
  CHECK(split.positives == std::vector<double>{0.9, 0.5});
  CHECK(split.negatives == std::vector<double>{0.6});

  SUBCASE("all below threshold is a legal degenerate split") {
    ScoreSet low;
    low.threshold = 0.9;
    low.records.push_back({"a", 0.1, {}, {}});
    PredictionSplit s = split_predictions(low);
    CHECK(s.n_pos() == 0);
    CHECK(s.n_neg() == 1);
  }
  SUBCASE("threshold zero sends everything to the positive side") {
    ScoreSet z;
    z.threshold = 0.0;
    z.records.push_back({"a", 0.3, {}, {}});
    PredictionSplit s = split_predictions(z);
    CHECK(s.positives == std::vector<double>{0.3});
    CHECK(s.n_neg() == 0);
  }
  SUBCASE("empty set rejected") {
    CHECK_THROWS_AS(split_predictions(ScoreSet{}), Error);
  }
}

TEST_CASE("split properties on fuzzed sets") {
  std::mt19937 rng(11);
  for (int it = 0; it < 200; ++it) {
    ScoreSet set = testutil::random_dyadic_set(rng, 1 + it % 40);
    PredictionSplit a = split_predictions(set);
    CHECK(a.n_pos() + a.n_neg() == set.size());
    // Idempotence: re-splitting yields the identical partition.
    PredictionSplit b = split_predictions(set);
    CHECK(a.positives == b.positives);
    CHECK(a.negatives == b.negatives);
    CHECK(a.labels_pos == b.labels_pos);
    // Labels ride along for fully labelled sets.
    CHECK(a.labels_pos.size() == a.n_pos());
    CHECK(a.labels_neg.size() == a.n_neg());
    // Round trip: negatives store 1 - s for some raw score below t (exact
    // on the dyadic grid).
    for (double v : a.negatives) {
      const double raw = 1.0 - v;
      CHECK(raw < set.threshold);
      bool found = false;
      for (const auto& r : set.records) found = found || r.raw_score == raw;
      CHECK(found);
    }
  }
}

TEST_CASE("mixed labelling allowed for splitting, rejected for metrics") {
  ScoreSet set;
  set.records.push_back({"a", 0.9, 1, {}});
  set.records.push_back({"b", 0.1, {}, {}});
  CHECK(!set.labelled());
  CHECK(set.any_labelled());
  PredictionSplit split = split_predictions(set);  // labels dropped
  CHECK(split.labels_pos.empty());
  CHECK_THROWS_WITH_AS(set.require_labelled("realized metrics"),
                       doctest::Contains("mixed"), Error);
}
