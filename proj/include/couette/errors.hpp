#pragma once

#include <stdexcept>
#include <string>

namespace couette {

// Base class for every failure the toolkit can diagnose.  Subtypes live in
// the headers of the module whose contract they belong to.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A caller handed us inputs that violate a documented precondition.
struct InvalidInput : Error {
  using Error::Error;
};

// An iteration or quadrature failed to reach its stated tolerance.
struct NumericalFailure : Error {
  using Error::Error;
};

}  // namespace couette
