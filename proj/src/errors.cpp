#include "spdc/errors.hpp"

namespace spdc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::range: return "range";
  case ErrorKind::input: return "input";
  case ErrorKind::no_solution: return "no_solution";
  case ErrorKind::degenerate_input: return "degenerate_input";
  case ErrorKind::axis: return "axis";
  case ErrorKind::state: return "state";
  case ErrorKind::rank_deficiency: return "rank_deficiency";
  case ErrorKind::search: return "search";
  case ErrorKind::empty_result: return "empty_result";
  case ErrorKind::parse: return "parse";
  case ErrorKind::validation: return "validation";
  case ErrorKind::io: return "io";
  }
  return "unknown";
}

} // namespace spdc
