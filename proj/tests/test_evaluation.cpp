#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <numeric>
#include <set>

#include "stagetree/evaluation.hpp"
#include "support.hpp"

using namespace stagetree;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

ScoreEntry f1(std::string method, std::string dataset, int run, double score) {
  return ScoreEntry{std::move(method), std::move(dataset), run, MetricKind::F1, score};
}

}  // namespace

TEST_CASE("normalized score") {
  CHECK(normalized_score(0.0, MetricKind::RMSE) == 1.0);
  CHECK(normalized_score(std::exp(1.0) - 1.0, MetricKind::RMSE) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normalized_score(0.533, MetricKind::F1) == 0.533);
  CHECK(normalized_score(0.533, MetricKind::F1Weighted) == 0.533);
  CHECK(normalized_score(3.0, MetricKind::RMSE) < normalized_score(2.0, MetricKind::RMSE));
  CHECK(normalized_score(1e12, MetricKind::RMSE) > 0.0);
  CHECK(code_of([] { normalized_score(-0.1, MetricKind::RMSE); }) == ErrorCode::InvalidScore);
  CHECK(code_of([] { normalized_score(1.1, MetricKind::F1); }) == ErrorCode::InvalidScore);
  CHECK(code_of([] { normalized_score(-0.1, MetricKind::F1Weighted); }) == ErrorCode::InvalidScore);
}

TEST_CASE("rescaled normalized score") {
  CHECK(rescaled_ns(0.7, 0.7) == 1.0);
  CHECK(rescaled_ns(0.0, 0.4) == 0.0);
  CHECK(rescaled_ns(0.883, 0.878) == doctest::Approx(1.0056947608200455).epsilon(1e-12));
  CHECK(code_of([] { rescaled_ns(0.5, 0.0); }) == ErrorCode::DivisionByZero);
}

TEST_CASE("metric scores") {
  const std::vector<std::string> truth = {"0", "0", "1", "1"};
  const std::vector<std::string> pred = {"0", "1", "1", "1"};
  CHECK(metric_score(pred, truth, MetricKind::F1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(metric_score(truth, truth, MetricKind::F1) == 1.0);
  CHECK(metric_score(truth, truth, MetricKind::F1Weighted) == 1.0);
  // Class 0: p=1, r=1/2, f=2/3. Class 1: p=2/3, r=1, f=4/5. Equal support.
  CHECK(metric_score(pred, truth, MetricKind::F1Weighted) == doctest::Approx((2.0 / 3 + 0.8) / 2).epsilon(1e-15));

  const std::vector<std::string> y = {"1", "2", "3"};
  const std::vector<std::string> yhat = {"1", "2", "5"};
  CHECK(metric_score(yhat, y, MetricKind::RMSE) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-15));

  const std::vector<double> a = {1, 2, 3}, b = {1, 2, 5};
  CHECK(rmse(a, b) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-15));

  const std::vector<std::string> short_pred = {"0"};
  CHECK(code_of([&] { metric_score(short_pred, truth, MetricKind::F1); }) == ErrorCode::LengthMismatch);
  const std::vector<std::string> empty;
  CHECK(code_of([&] { metric_score(empty, empty, MetricKind::F1); }) == ErrorCode::LengthMismatch);
  const std::vector<std::string> alien = {"0", "0", "7", "1"};
  CHECK(code_of([&] { metric_score(alien, truth, MetricKind::F1); }) == ErrorCode::UnknownLabel);
  const std::vector<std::string> words = {"a", "b", "c"};
  CHECK(code_of([&] { metric_score(words, y, MetricKind::RMSE); }) == ErrorCode::UnknownLabel);

  const std::vector<std::string> yes_no = {"no", "yes", "no"};
  CHECK(default_positive_label(yes_no) == "yes");
  CHECK(default_positive_label(truth) == "1");
  const std::vector<std::string> none = {"no", "no"};
  CHECK(f1_binary(none, none, "yes") == 0.0);
}

TEST_CASE("fractional ranks") {
  const std::vector<double> v = {0.5, 0.9, 0.5, 0.1};
  const std::vector<double> expected = {2.5, 1.0, 2.5, 4.0};
  CHECK(fractional_ranks_descending(v) == expected);
  const std::vector<double> one = {0.3};
  CHECK(fractional_ranks_descending(one) == std::vector<double>{1.0});
}

TEST_CASE("ranks for small tables") {
  ScoreTable single{{f1("m", "d", 0, 0.4)}};
  const RankReport r1 = compute_ranks(single, "m");
  CHECK(r1.method("m").avg_rank == 1.0);
  CHECK(r1.method("m").avg_best_rank == 1.0);
  CHECK(r1.method("m").top1 == 1);
  CHECK(!r1.method("m").wins.has_value());

  ScoreTable two{{f1("a", "d", 0, 0.9), f1("b", "d", 0, 0.8)}};
  const RankReport r2 = compute_ranks(two, "b");
  CHECK(r2.method("a").avg_rank == 1.0);
  CHECK(r2.method("b").avg_rank == 2.0);
  CHECK(*r2.method("a").wins == 1);
  CHECK(*r2.method("a").losses == 0);
  CHECK(r2.method("b").top1 == 0);

  CHECK(code_of([] { compute_ranks(ScoreTable{}, "a"); }) == ErrorCode::EmptyTable);
  CHECK(code_of([&] { compute_ranks(two, "zzz"); }) == ErrorCode::UnknownReference);
}

TEST_CASE("pooled ranks over runs") {
  // Four methods with three runs and one deterministic method, one dataset.
  ScoreTable t;
  const char* methods[] = {"m1", "m2", "m3", "m4"};
  int v = 40;
  for (const char* m : methods) {
    for (int run = 0; run < 3; ++run) t.entries.push_back(f1(m, "d", run, ++v / 100.0));
  }
  t.entries.push_back(f1("det", "d", 0, 0.455));
  const RankReport r = compute_ranks(t, "det");
  REQUIRE(r.run_ranks.size() == 13);
  std::vector<double> ranks;
  for (const auto& rr : r.run_ranks) ranks.push_back(rr.rank);
  std::sort(ranks.begin(), ranks.end());
  for (int i = 0; i < 13; ++i) CHECK(ranks[static_cast<std::size_t>(i)] == i + 1);
  // m4 holds the top three values, ranks 1..3.
  CHECK(r.method("m4").avg_rank == 2.0);
  CHECK(r.method("m4").avg_best_rank == 1.0);
  CHECK(r.method("m4").avg_ns == doctest::Approx(0.51).epsilon(1e-12));
  CHECK(r.method("m4").avg_best_ns == doctest::Approx(0.52).epsilon(1e-12));
  CHECK(r.method("det").avg_rank == 8.0);
  CHECK(*r.method("m4").wins == 1);
  CHECK(*r.method("m1").losses == 1);
  for (const auto& m : r.methods) {
    CHECK(m.avg_best_rank <= m.avg_rank);
    if (m.wins) CHECK(*m.wins + *m.losses <= 1);
  }

  // Tied with m2's second run: positions 8 and 9 share 8.5.
  t.entries.back().raw_score = 45 / 100.0;
  CHECK(compute_ranks(t, "det").method("det").avg_rank == 8.5);
}

TEST_CASE("ranks ignore monotone transforms per dataset") {
  ScoreTable t{{f1("a", "x", 0, 0.2), f1("b", "x", 0, 0.6), f1("a", "y", 0, 0.9), f1("b", "y", 0, 0.3)}};
  ScoreTable squared = t;
  for (auto& e : squared.entries) e.raw_score = e.raw_score * e.raw_score;
  const RankReport r1 = compute_ranks(t, "a");
  const RankReport r2 = compute_ranks(squared, "a");
  for (std::size_t i = 0; i < r1.methods.size(); ++i) {
    CHECK(r1.methods[i].avg_rank == r2.methods[i].avg_rank);
    CHECK(r1.methods[i].wins == r2.methods[i].wins);
  }
}

TEST_CASE("score csv") {
  const std::string text =
      "method,dataset,run,metric,raw_score\n"
      "\"auto, gluon\",boston,0,rmse,3.5\n"
      "tree,boston,0,rmse,3.25\n"
      "tree,boston,1,rmse,3.0\n";
  const ScoreTable t = parse_score_csv(text);
  REQUIRE(t.entries.size() == 3);
  CHECK(t.entries[0].method == "auto, gluon");
  CHECK(t.entries[2].run == 1);
  CHECK(t.entries[1].metric == MetricKind::RMSE);
  CHECK(parse_score_csv(format_score_csv(t)).entries.size() == 3);
  CHECK(format_score_csv(parse_score_csv(format_score_csv(t))) == format_score_csv(t));

  CHECK(code_of([] { parse_score_csv("a,b\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_score_csv("method,dataset,run,metric,raw_score\nx,y,z,f1,0.5\n"); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { parse_score_csv("method,dataset,run,metric,raw_score\nx,y,0,accuracy,0.5\n"); }) ==
        ErrorCode::ConfigError);

  ScoreTable dup{{f1("a", "d", 0, 0.5), f1("a", "d", 0, 0.6)}};
  CHECK(code_of([&] { dup.validate(); }) == ErrorCode::InvalidParams);
  ScoreTable bad{{f1("a", "d", 0, 1.5)}};
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidParams);
}

TEST_CASE("report outputs") {
  ScoreTable t{{f1("a", "d", 0, 0.9), f1("b", "d", 0, 0.8)}};
  const RankReport r = compute_ranks(t, "b");
  const auto j = nlohmann::json::parse(rank_report_json(r));
  CHECK(j.contains("ranking"));
  const std::string table = rank_report_table(r);
  for (const char* col : {"Method", "Wins", "Losses", "Top 1", "Avg. NS %", "Avg. Best NS %", "Avg. Rank",
                          "Avg. Best Rank"}) {
    CHECK(table.find(col) != std::string::npos);
  }
  CHECK(table.find("90.0") != std::string::npos);
  const std::string csv = rescaled_ns_csv(t, "b");
  CHECK(csv.find("method,dataset,avg_ns,best_ns,rescaled_avg_ns,rescaled_best_ns") == 0);
  CHECK(csv.find("a,d,") != std::string::npos);
}

TEST_CASE("splits") {
  CHECK(split_sizes(10).train == 6);
  CHECK(split_sizes(1000).dev == 200);
  const SplitSizes s7 = split_sizes(7);
  CHECK(s7.train == 4);
  CHECK(s7.dev == 1);
  CHECK(s7.test == 2);
  CHECK(code_of([] { split_sizes(4); }) == ErrorCode::TooFewRows);

  std::vector<int> rows(103);
  std::iota(rows.begin(), rows.end(), 0);
  const auto split = split_dataset(rows, 9);
  CHECK(split.train.size() == 61);
  CHECK(split.dev.size() == 20);
  CHECK(split.test.size() == 22);
  std::multiset<int> all(split.train.begin(), split.train.end());
  all.insert(split.dev.begin(), split.dev.end());
  all.insert(split.test.begin(), split.test.end());
  CHECK(all == std::multiset<int>(rows.begin(), rows.end()));
  CHECK(split_dataset(rows, 9).train == split.train);
}
