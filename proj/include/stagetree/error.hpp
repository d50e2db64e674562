#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stagetree {

enum class ErrorCode {
  UnknownNode,
  NeverVisited,
  InvalidParams,
  TerminalNode,
  NoSolution,
  MalformedResponse,
  EndpointError,
  IoError,
  ExecutorError,
  TransportError,
  ProtocolError,
  InvalidScore,
  DivisionByZero,
  EmptyTable,
  LengthMismatch,
  UnknownLabel,
  TooFewRows,
  JournalCorrupt,
  FingerprintMismatch,
  UnknownReference,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library is an Error carrying a stable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stagetree
