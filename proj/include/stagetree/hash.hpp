#pragma once

#include <string>
#include <string_view>

namespace stagetree {

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// First 16 hex digits of sha256_hex; used for content-addressed ids.
std::string short_hash(std::string_view bytes);

}  // namespace stagetree
