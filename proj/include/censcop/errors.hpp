#pragma once

#include <stdexcept>
#include <string>

namespace censcop {

// Error classes map one-to-one onto CLI exit codes: input problems exit with 2,
// numerical failures with 3.
enum class ErrorClass { Input, Domain, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorClass::Domain, what) {}
};

/// Malformed or inconsistent user input (files, configs, flags).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorClass::Input, what) {}
};

/// Root finding, optimisation or inversion did not converge.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorClass::Numerical, what) {}
};

inline const char* error_class_name(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::Input: return "input";
    case ErrorClass::Domain: return "domain";
    case ErrorClass::Numerical: return "numerical";
  }
  return "unknown";
}

}  // namespace censcop
