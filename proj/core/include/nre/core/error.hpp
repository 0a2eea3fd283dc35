// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace nre {

/// Root of every error raised by the toolkit. The subclasses map one-to-one
/// onto the command-line exit codes (config 2, data 3, numeric 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor/network dimension disagreement or misuse of a stateful API
/// (e.g. backward before forward).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf produced or consumed, or a diverging optimisation.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input files and datasets.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nre
