#pragma once

#include <string>
#include <string_view>

namespace stagetree::detail {

/// "http://host:port/v1" -> {"http://host:port", "/v1"}.
struct SplitUrl {
  std::string origin;
  std::string path;
};

inline SplitUrl split_url(std::string_view url) {
  const std::size_t scheme = url.find("://");
  const std::size_t host_start = scheme == std::string_view::npos ? 0 : scheme + 3;
  const std::size_t slash = url.find('/', host_start);
  if (slash == std::string_view::npos) return {std::string(url), ""};
  std::string path(url.substr(slash));
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {std::string(url.substr(0, slash)), path};
}

}  // namespace stagetree::detail
