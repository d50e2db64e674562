#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stagetree/error.hpp"
#include "stagetree/problem.hpp"

namespace stagetree {

// ---------------------------------------------------------------------------
// Scores
// ---------------------------------------------------------------------------

/// Maps a raw metric value into [0, 1]: 1 / (1 + ln(1 + rmse)) for RMSE,
/// identity for the F1 kinds. Throws InvalidScore on a negative RMSE or an
/// F1 outside [0, 1].
double normalized_score(double raw, MetricKind metric);

/// ns_baseline / ns_reference. Throws DivisionByZero when the reference is 0.
double rescaled_ns(double ns_baseline, double ns_reference);

double rmse(std::span<const double> predictions, std::span<const double> truth);

/// F1 of `positive` against all other labels.
double f1_binary(std::span<const std::string> predictions, std::span<const std::string> truth,
                 std::string_view positive);

/// Support-weighted mean of the per-class F1 over the truth's classes.
double f1_weighted(std::span<const std::string> predictions, std::span<const std::string> truth);

/// Positive class used for binary F1: "1" when present, otherwise the
/// lexicographically last truth label.
std::string default_positive_label(std::span<const std::string> truth);

/// Dispatches on the metric. RMSE parses the labels as numbers. Throws
/// LengthMismatch on unequal or empty inputs and UnknownLabel when a
/// predicted class never occurs in the truth.
double metric_score(std::span<const std::string> predictions, std::span<const std::string> truth,
                    MetricKind metric);

// ---------------------------------------------------------------------------
// Benchmark tables
// ---------------------------------------------------------------------------

struct ScoreEntry {
  std::string method;
  std::string dataset;
  int run = 0;
  MetricKind metric = MetricKind::F1;
  double raw_score = 0.0;
};

struct ScoreTable {
  std::vector<ScoreEntry> entries;

  /// Throws InvalidParams on duplicate (method, dataset, run) or out-of-range
  /// scores.
  void validate() const;
};

/// CSV with header method,dataset,run,metric,raw_score.
ScoreTable read_score_csv(const std::filesystem::path& path);
ScoreTable parse_score_csv(std::string_view text);
std::string format_score_csv(const ScoreTable& table);

struct MethodReport {
  std::string method;
  double avg_ns = 0.0;
  double avg_best_ns = 0.0;
  double avg_rank = 0.0;
  double avg_best_rank = 0.0;
  std::optional<int> wins;    // nullopt for the reference method
  std::optional<int> losses;  // nullopt for the reference method
  int top1 = 0;
};

/// Pooled rank of one run within its dataset.
struct RunRank {
  std::string method;
  std::string dataset;
  int run = 0;
  double ns = 0.0;
  double rank = 0.0;
};

struct RankReport {
  std::vector<MethodReport> methods;  // sorted by method name
  std::vector<RunRank> run_ranks;
  std::string reference_method;
  std::size_t dataset_count = 0;

  const MethodReport& method(std::string_view name) const;
};

/// Per dataset, pools every run of every method and ranks them by NS,
/// descending; tied runs share the mean of their positions. Averages run
/// over all runs (avg_rank, avg_ns) or over each dataset's best run
/// (avg_best_rank, avg_best_ns). Wins/losses count datasets where a method's
/// best NS is above/below the reference's best NS; top1 counts datasets where
/// the method's best NS is the maximum. Throws EmptyTable, UnknownReference.
RankReport compute_ranks(const ScoreTable& table, const std::string& reference_method);

std::string rank_report_json(const RankReport& report);
/// Text table with columns Method, Wins, Losses, Top 1, Avg. NS %,
/// Avg. Best NS %, Avg. Rank, Avg. Best Rank.
std::string rank_report_table(const RankReport& report);
/// method,dataset,avg_ns,best_ns,rescaled_avg_ns,rescaled_best_ns per
/// (method, dataset) relative to the reference.
std::string rescaled_ns_csv(const ScoreTable& table, const std::string& reference_method);

/// Fractional (average) ranks of `values` sorted descending: rank 1 is the
/// largest value.
std::vector<double> fractional_ranks_descending(std::span<const double> values);

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

template <typename Row>
struct DatasetSplit {
  std::vector<Row> train;
  std::vector<Row> dev;
  std::vector<Row> test;
};

/// Row counts for a 6:2:2 split: floor for train and dev, remainder to test.
struct SplitSizes {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;
};
SplitSizes split_sizes(std::size_t rows);

/// Seeded shuffle followed by a 6:2:2 split. Throws TooFewRows below 5 rows.
template <typename Row>
DatasetSplit<Row> split_dataset(std::vector<Row> rows, std::uint64_t seed) {
  const SplitSizes sizes = split_sizes(rows.size());
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  DatasetSplit<Row> out;
  auto first = std::make_move_iterator(rows.begin());
  out.train.assign(first, first + static_cast<std::ptrdiff_t>(sizes.train));
  first += static_cast<std::ptrdiff_t>(sizes.train);
  out.dev.assign(first, first + static_cast<std::ptrdiff_t>(sizes.dev));
  first += static_cast<std::ptrdiff_t>(sizes.dev);
  out.test.assign(first, std::make_move_iterator(rows.end()));
  return out;
}

}  // namespace stagetree
