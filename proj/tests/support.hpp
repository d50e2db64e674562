#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "stagetree/tree.hpp"

namespace testing_support {

class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "stagetree-XXXXXX").string();
    path_ = ::mkdtemp(pattern.data());
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

// Topology of the golden worked example: five children per expanded node,
// depth 1 = feature engineering, 2 = model training, 3 = evaluation.
struct CaseStudy {
  stagetree::Tree tree{"case-study"};
  std::map<std::string, stagetree::NodeId> ids;  // "0", "0-1", "0-1-1", ...
};

inline void expand_five(CaseStudy& cs, const std::string& name, stagetree::Stage stage) {
  for (int i = 0; i < 5; ++i) {
    const std::string child = name + "-" + std::to_string(i);
    cs.ids[child] = cs.tree.add_child(
        cs.ids.at(name), stagetree::Insight::make(stage, child + " " + std::string(stagetree::stage_name(stage))));
  }
}

inline const std::vector<std::pair<std::string, double>>& case_study_simulations() {
  static const std::vector<std::pair<std::string, double>> sims = {
      {"0", 0.6855841857240594},     {"0-0", 0.6420233166755841},   {"0-0-2", 0.6594266804380511},
      {"0-1", 0.5985614604756948},   {"0-1-1", 0.6944266833187726}, {"0-2", 0.5997286931710517},
      {"0-2-1", 0.6372459669415207}, {"0-2-1-2", 0.6520761876370741}, {"0-3", 0.51620611302976},
      {"0-3-1", 0.4649275532741641},
  };
  return sims;
}

inline CaseStudy build_case_study() {
  using stagetree::Stage;
  CaseStudy cs;
  cs.ids["0"] = cs.tree.root();
  expand_five(cs, "0", Stage::FeatureEngineering);
  for (const char* n : {"0-0", "0-1", "0-2", "0-3"}) expand_five(cs, n, Stage::ModelTraining);
  expand_five(cs, "0-2-1", Stage::ModelEvaluation);
  for (const auto& [name, score] : case_study_simulations()) {
    stagetree::SimulationResult r;
    r.dev_score = score;
    const stagetree::NodeId id = cs.ids.at(name);
    cs.tree.record_simulation(id, r);
    cs.tree.backpropagate(id, score, "");
  }
  return cs;
}

}  // namespace testing_support
