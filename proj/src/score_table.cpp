#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "stagetree/evaluation.hpp"

namespace stagetree {
namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

struct DatasetView {
  std::vector<std::size_t> entries;  // indices into the table
};

}  // namespace

void ScoreTable::validate() const {
  std::set<std::tuple<std::string, std::string, int>> seen;
  for (const auto& e : entries) {
    if (!seen.emplace(e.method, e.dataset, e.run).second) {
      throw Error(ErrorCode::InvalidParams, "duplicate entry " + e.method + "/" + e.dataset + "/" +
                                                std::to_string(e.run));
    }
    try {
      normalized_score(e.raw_score, e.metric);
    } catch (const Error& err) {
      throw Error(ErrorCode::InvalidParams, e.method + "/" + e.dataset + ": " + err.what());
    }
  }
}

ScoreTable parse_score_csv(std::string_view text) {
  ScoreTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (header) {
      if (fields != std::vector<std::string>{"method", "dataset", "run", "metric", "raw_score"}) {
        throw Error(ErrorCode::ConfigError, "score CSV header must be method,dataset,run,metric,raw_score");
      }
      header = false;
      continue;
    }
    const std::string where = "score CSV line " + std::to_string(line_no);
    if (fields.size() != 5) throw Error(ErrorCode::ConfigError, where + ": expected 5 fields");
    ScoreEntry e;
    e.method = fields[0];
    e.dataset = fields[1];
    try {
      std::size_t used = 0;
      e.run = std::stoi(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("run");
      e.raw_score = std::stod(fields[4], &used);
      if (used != fields[4].size()) throw std::invalid_argument("raw_score");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, where + ": run and raw_score must be numbers");
    }
    const auto metric = metric_from_name(fields[3]);
    if (!metric) throw Error(ErrorCode::ConfigError, where + ": unknown metric '" + fields[3] + "'");
    e.metric = *metric;
    table.entries.push_back(std::move(e));
  }
  if (header) throw Error(ErrorCode::ConfigError, "score CSV is empty");
  table.validate();
  return table;
}

ScoreTable read_score_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_score_csv(buf.str());
}

std::string format_score_csv(const ScoreTable& table) {
  std::string out = "method,dataset,run,metric,raw_score\n";
  for (const auto& e : table.entries) {
    out += csv_field(e.method) + ',' + csv_field(e.dataset) + ',' + std::to_string(e.run) + ',' +
           std::string(metric_name(e.metric)) + ',' + format_double(e.raw_score) + '\n';
  }
  return out;
}

const MethodReport& RankReport::method(std::string_view name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  throw Error(ErrorCode::UnknownReference, "no method '" + std::string(name) + "' in report");
}

RankReport compute_ranks(const ScoreTable& table, const std::string& reference_method) {
  if (table.entries.empty()) throw Error(ErrorCode::EmptyTable, "score table has no entries");
  table.validate();

  std::map<std::string, DatasetView> datasets;
  std::set<std::string> method_names;
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    datasets[table.entries[i].dataset].entries.push_back(i);
    method_names.insert(table.entries[i].method);
  }
  if (!method_names.contains(reference_method)) {
    throw Error(ErrorCode::UnknownReference, "reference method '" + reference_method + "' not in table");
  }

  RankReport report;
  report.reference_method = reference_method;
  report.dataset_count = datasets.size();

  struct Acc {
    double ns_sum = 0.0, rank_sum = 0.0, best_ns_sum = 0.0, best_rank_sum = 0.0;
    std::size_t runs = 0, datasets = 0;
    int wins = 0, losses = 0, top1 = 0;
  };
  std::map<std::string, Acc> acc;

  for (const auto& [dataset, view] : datasets) {
    std::vector<double> ns;
    ns.reserve(view.entries.size());
    for (std::size_t i : view.entries) {
      const auto& e = table.entries[i];
      ns.push_back(normalized_score(e.raw_score, e.metric));
    }
    const std::vector<double> ranks = fractional_ranks_descending(ns);

    // Best run per method: highest NS, hence lowest rank.
    std::map<std::string, std::size_t> best;  // method -> position in view
    for (std::size_t p = 0; p < view.entries.size(); ++p) {
      const auto& e = table.entries[view.entries[p]];
      report.run_ranks.push_back(RunRank{e.method, dataset, e.run, ns[p], ranks[p]});
      Acc& a = acc[e.method];
      a.ns_sum += ns[p];
      a.rank_sum += ranks[p];
      ++a.runs;
      auto it = best.find(e.method);
      if (it == best.end() || ns[p] > ns[it->second]) best[e.method] = p;
    }
    double top = 0.0;
    for (const auto& [m, p] : best) top = std::max(top, ns[p]);
    const auto ref = best.find(reference_method);
    for (const auto& [m, p] : best) {
      Acc& a = acc[m];
      a.best_ns_sum += ns[p];
      a.best_rank_sum += ranks[p];
      ++a.datasets;
      if (ns[p] == top) ++a.top1;
      if (m != reference_method && ref != best.end()) {
        if (ns[p] > ns[ref->second]) ++a.wins;
        if (ns[p] < ns[ref->second]) ++a.losses;
      }
    }
  }

  for (const auto& [m, a] : acc) {
    MethodReport r;
    r.method = m;
    r.avg_ns = a.ns_sum / static_cast<double>(a.runs);
    r.avg_rank = a.rank_sum / static_cast<double>(a.runs);
    r.avg_best_ns = a.best_ns_sum / static_cast<double>(a.datasets);
    r.avg_best_rank = a.best_rank_sum / static_cast<double>(a.datasets);
    if (m != reference_method) {
      r.wins = a.wins;
      r.losses = a.losses;
    }
    r.top1 = a.top1;
    report.methods.push_back(std::move(r));
  }
  return report;
}

std::string rank_report_json(const RankReport& report) {
  nlohmann::ordered_json j;
  j["reference_method"] = report.reference_method;
  j["dataset_count"] = report.dataset_count;
  j["ranking"] = "pooled runs per dataset, fractional ties";
  auto methods = nlohmann::ordered_json::array();
  for (const auto& m : report.methods) {
    methods.push_back({{"method", m.method},
                       {"avg_ns", m.avg_ns},
                       {"avg_best_ns", m.avg_best_ns},
                       {"avg_rank", m.avg_rank},
                       {"avg_best_rank", m.avg_best_rank},
                       {"wins", m.wins ? nlohmann::ordered_json(*m.wins) : nullptr},
                       {"losses", m.losses ? nlohmann::ordered_json(*m.losses) : nullptr},
                       {"top1", m.top1}});
  }
  j["methods"] = std::move(methods);
  auto runs = nlohmann::ordered_json::array();
  for (const auto& r : report.run_ranks) {
    runs.push_back({{"method", r.method}, {"dataset", r.dataset}, {"run", r.run}, {"ns", r.ns},
                    {"rank", r.rank}});
  }
  j["run_ranks"] = std::move(runs);
  return j.dump(2) + "\n";
}

std::string rank_report_table(const RankReport& report) {
  const std::vector<std::string> header = {"Method", "Wins",   "Losses",    "Top 1",
                                           "Avg. NS %", "Avg. Best NS %", "Avg. Rank", "Avg. Best Rank"};
  std::vector<std::vector<std::string>> rows;
  auto fixed = [](double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
  };
  for (const auto& m : report.methods) {
    rows.push_back({m.method, m.wins ? std::to_string(*m.wins) : "-",
                    m.losses ? std::to_string(*m.losses) : "-", std::to_string(m.top1),
                    fixed(100.0 * m.avg_ns, 1), fixed(100.0 * m.avg_best_ns, 1), fixed(m.avg_rank, 1),
                    fixed(m.avg_best_rank, 1)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out << "  ";
      if (c == 0) out << std::left << std::setw(static_cast<int>(width[c])) << r[c];
      else out << std::right << std::setw(static_cast<int>(width[c])) << r[c];
    }
    out << '\n';
  };
  emit(header);
  std::size_t total = 2 * (header.size() - 1);
  for (auto w : width) total += w;
  out << std::string(total, '-') << '\n';
  for (const auto& r : rows) emit(r);
  return out.str();
}

std::string rescaled_ns_csv(const ScoreTable& table, const std::string& reference_method) {
  struct Cell {
    double sum = 0.0, best = 0.0;
    std::size_t n = 0;
  };
  std::map<std::pair<std::string, std::string>, Cell> cells;  // (method, dataset)
  for (const auto& e : table.entries) {
    const double ns = normalized_score(e.raw_score, e.metric);
    Cell& c = cells[{e.method, e.dataset}];
    c.best = c.n == 0 ? ns : std::max(c.best, ns);
    c.sum += ns;
    ++c.n;
  }
  std::string out = "method,dataset,avg_ns,best_ns,rescaled_avg_ns,rescaled_best_ns\n";
  for (const auto& [key, c] : cells) {
    const auto ref = cells.find({reference_method, key.second});
    if (ref == cells.end()) {
      throw Error(ErrorCode::UnknownReference,
                  "reference method '" + reference_method + "' has no runs on " + key.second);
    }
    const double avg = c.sum / static_cast<double>(c.n);
    const double ref_avg = ref->second.sum / static_cast<double>(ref->second.n);
    out += csv_field(key.first) + ',' + csv_field(key.second) + ',' + format_double(avg) + ',' +
           format_double(c.best) + ',' + format_double(rescaled_ns(avg, ref_avg)) + ',' +
           format_double(rescaled_ns(c.best, ref->second.best)) + '\n';
  }
  return out;
}

}  // namespace stagetree
