#include "stagetree/evaluation.hpp"

#include <charconv>
#include <numeric>
#include <set>

#include "stagetree/kernels.hpp"

namespace stagetree {
namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(a) + " predictions for " + std::to_string(b) + " labels");
  }
  if (a == 0) throw Error(ErrorCode::LengthMismatch, "no predictions");
}

double parse_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw Error(ErrorCode::UnknownLabel, "'" + s + "' is not a number");
  return v;
}

double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

double normalized_score(double raw, MetricKind metric) {
  if (!std::isfinite(raw)) throw Error(ErrorCode::InvalidScore, "score is not finite");
  if (metric == MetricKind::RMSE) {
    if (raw < 0.0) throw Error(ErrorCode::InvalidScore, "negative rmse " + std::to_string(raw));
    return 1.0 / (1.0 + std::log1p(raw));
  }
  if (raw < 0.0 || raw > 1.0) throw Error(ErrorCode::InvalidScore, "f1 outside [0, 1]: " + std::to_string(raw));
  return raw;
}

double rescaled_ns(double ns_baseline, double ns_reference) {
  if (ns_reference == 0.0) throw Error(ErrorCode::DivisionByZero, "reference NS is 0");
  return ns_baseline / ns_reference;
}

double rmse(std::span<const double> predictions, std::span<const double> truth) {
  check_lengths(predictions.size(), truth.size());
  return std::sqrt(kernels::sum_squared_diff(predictions, truth) / static_cast<double>(truth.size()));
}

double f1_binary(std::span<const std::string> predictions, std::span<const std::string> truth,
                 std::string_view positive) {
  check_lengths(predictions.size(), truth.size());
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predictions[i] == positive;
    const bool t = truth[i] == positive;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
  }
  return f1_from_counts(tp, fp, fn);
}

double f1_weighted(std::span<const std::string> predictions, std::span<const std::string> truth) {
  check_lengths(predictions.size(), truth.size());
  std::map<std::string, std::size_t> support;
  for (const auto& t : truth) ++support[t];
  double total = 0.0;
  for (const auto& [label, count] : support) {
    total += static_cast<double>(count) * f1_binary(predictions, truth, label);
  }
  return total / static_cast<double>(truth.size());
}

std::string default_positive_label(std::span<const std::string> truth) {
  if (truth.empty()) throw Error(ErrorCode::LengthMismatch, "no labels");
  if (std::find(truth.begin(), truth.end(), "1") != truth.end()) return "1";
  return *std::max_element(truth.begin(), truth.end());
}

double metric_score(std::span<const std::string> predictions, std::span<const std::string> truth,
                    MetricKind metric) {
  check_lengths(predictions.size(), truth.size());
  if (metric == MetricKind::RMSE) {
    std::vector<double> p, t;
    p.reserve(predictions.size());
    t.reserve(truth.size());
    for (const auto& s : predictions) p.push_back(parse_number(s));
    for (const auto& s : truth) t.push_back(parse_number(s));
    return rmse(p, t);
  }
  const std::set<std::string_view> known(truth.begin(), truth.end());
  for (const auto& p : predictions) {
    if (!known.contains(p)) throw Error(ErrorCode::UnknownLabel, "predicted label '" + p + "' not in truth");
  }
  if (metric == MetricKind::F1) return f1_binary(predictions, truth, default_positive_label(truth));
  return f1_weighted(predictions, truth);
}

std::vector<double> fractional_ranks_descending(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share the mean of ranks i+1..j+1.
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

SplitSizes split_sizes(std::size_t rows) {
  if (rows < 5) throw Error(ErrorCode::TooFewRows, "need at least 5 rows, got " + std::to_string(rows));
  SplitSizes s;
  s.train = rows * 6 / 10;
  s.dev = rows * 2 / 10;
  s.test = rows - s.train - s.dev;
  return s;
}

}  // namespace stagetree
