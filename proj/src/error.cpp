#include "stagetree/error.hpp"

namespace stagetree {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::NeverVisited: return "NeverVisited";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::TerminalNode: return "TerminalNode";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::EndpointError: return "EndpointError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ExecutorError: return "ExecutorError";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::InvalidScore: return "InvalidScore";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::JournalCorrupt: return "JournalCorrupt";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::UnknownReference: return "UnknownReference";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace stagetree
