#pragma once

#include <stdexcept>
#include <string>

namespace occlusim {

enum class ErrorKind {
  invalid_input,
  degenerate_geometry,
  invalid_query,
  invalid_target,
  internal_error,
  generation_failure,
  parse_error,
  scenario_error,
  empty_data,
  undefined_mean,
  no_occlusion_observed,
  infeasible_k,
  io_error,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it onto a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix, for adding context while rethrowing.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace occlusim
