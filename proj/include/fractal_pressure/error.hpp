#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fp {

// Numeric values match the C API status codes in fp.h.
enum class ErrorCode : int {
  invalid_argument = 1,
  config = 2,
  cap_exceeded = 3,
  non_conformal = 4,
  numeric = 5,
  invalid_word = 6,
  io = 7,
  potential_rejected = 8,
  internal = 9,
  out_of_range = 10,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class CapExceeded : public Error {
 public:
  CapExceeded(std::uint64_t cap, unsigned max_depth, const std::string& what)
      : Error(ErrorCode::cap_exceeded, what), cap_(cap), max_depth_(max_depth) {}

  std::uint64_t cap() const noexcept { return cap_; }
  // Largest depth whose word count stays within the cap.
  unsigned max_feasible_depth() const noexcept { return max_depth_; }

 private:
  std::uint64_t cap_;
  unsigned max_depth_;
};

}  // namespace fp
