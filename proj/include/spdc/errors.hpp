#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spdc {

enum class ErrorKind {
  range,            // wavelength outside a dispersion set's valid interval
  input,            // malformed or inconsistent arguments
  no_solution,      // root or period search has no admissible answer
  degenerate_input, // ill-posed data (all-zero amplitude, flat dispersion, ...)
  axis,             // spectral states on different grids
  state,            // density matrix violates Hermiticity/trace/PSD
  rank_deficiency,  // tomography settings are not informationally complete
  search,           // optimizer could not bracket an extremum
  empty_result,     // filter removes everything
  parse,            // config / data file syntax
  validation,       // config / data value violates an invariant
  io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` drives CLI exit records.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace spdc
