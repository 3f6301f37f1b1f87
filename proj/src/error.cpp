#include "occlusim/error.hpp"

namespace occlusim {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::degenerate_geometry: return "degenerate-geometry";
    case ErrorKind::invalid_query: return "invalid-query";
    case ErrorKind::invalid_target: return "invalid-target";
    case ErrorKind::internal_error: return "internal-error";
    case ErrorKind::generation_failure: return "generation-failure";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::scenario_error: return "scenario-error";
    case ErrorKind::empty_data: return "empty-data";
    case ErrorKind::undefined_mean: return "undefined-mean";
    case ErrorKind::no_occlusion_observed: return "no-occlusion-observed";
    case ErrorKind::infeasible_k: return "infeasible-k";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace occlusim
