#include "stagetree/simulation.hpp"

#include <algorithm>

namespace stagetree {

SimulationResult failed_result(std::string detail) {
  SimulationResult r;
  r.status = RunStatus::Failed;
  r.error_detail = std::move(detail);
  return r;
}

std::string stage_marker(Stage s) {
  std::string m = "# [stage] ";
  m.append(stage_name(s));
  m.push_back('\n');
  return m;
}

std::string with_stage_marker(Stage s, std::string_view code) {
  const std::string marker = stage_marker(s);
  if (code.starts_with(marker)) return std::string(code);
  return marker + std::string(code);
}

std::string concatenate_stages(const std::vector<StageArtifact>& stages) {
  std::string out;
  for (const auto& s : stages) out += s.code;
  return out;
}

std::optional<std::string> stage_code_prefix(std::string_view solution_code, Stage upto) {
  // Markers only count at the start of a line.
  std::size_t cut = std::string_view::npos;
  bool any_marker = false;
  for (Stage s : kAllStages) {
    const std::string marker = stage_marker(s);
    for (std::size_t pos = solution_code.find(marker); pos != std::string_view::npos;
         pos = solution_code.find(marker, pos + 1)) {
      if (pos != 0 && solution_code[pos - 1] != '\n') continue;
      any_marker = true;
      if (ordinal(s) > ordinal(upto)) cut = std::min(cut, pos);
      break;
    }
  }
  if (!any_marker) return std::nullopt;
  std::string_view prefix = solution_code.substr(0, cut);
  if (prefix.empty()) return std::nullopt;
  return std::string(prefix);
}

}  // namespace stagetree
