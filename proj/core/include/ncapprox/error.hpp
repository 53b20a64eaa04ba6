#pragma once

#include <stdexcept>
#include <string>

namespace ncapprox {

enum class Errc {
  spec_mismatch,
  division_by_zero,
  out_of_range,
  singular_matrix,
  dimension_mismatch,
  insufficient_model,
  budget_exceeded,
  invalid_argument,
  parse_error,
  io_error,
};

const char* to_string(Errc code) noexcept;

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ncapprox
