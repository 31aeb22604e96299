// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace canndyn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model ingredients or a model document are invalid.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of an operation (e.g. lambda <= -mu0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to converge, or a simulation blew up.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace canndyn
