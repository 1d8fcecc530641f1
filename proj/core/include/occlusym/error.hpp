#pragma once

#include <stdexcept>
#include <string>

namespace occlusym {

// Base of every error the library raises. `kind()` is a stable,
// machine-readable tag used by the CLI's JSON error reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

// Mask-weighted attention with no visible key anywhere.
struct DegenerateConditioningError : Error {
  explicit DegenerateConditioningError(const std::string& what)
      : Error("degenerate_conditioning", what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error("io", what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error("numeric", what) {}
};

}  // namespace occlusym
