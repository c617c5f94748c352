#pragma once

#include <stdexcept>
#include <string>

namespace spinekit {

enum class ErrorKind {
  io,
  parse,
  size_mismatch,
  empty_selection,
  phantom_spec,
  reconstruction,
  contract,
  degenerate_distribution,
  threshold_failure,
  mapping,
  extraction,
  roi_too_small,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::size_mismatch: return "size_mismatch";
    case ErrorKind::empty_selection: return "empty_selection";
    case ErrorKind::phantom_spec: return "phantom_spec";
    case ErrorKind::reconstruction: return "reconstruction";
    case ErrorKind::contract: return "contract";
    case ErrorKind::degenerate_distribution: return "degenerate_distribution";
    case ErrorKind::threshold_failure: return "threshold_failure";
    case ErrorKind::mapping: return "mapping";
    case ErrorKind::extraction: return "extraction";
    case ErrorKind::roi_too_small: return "roi_too_small";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind so
/// the pipeline can downgrade per-vertebra failures to report warnings.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace spinekit
