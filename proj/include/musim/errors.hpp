// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace musim {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IsiViolation : public Error {
public:
  using Error::Error;
};

class NonMonotonicTime : public Error {
public:
  using Error::Error;
};

class UnknownProfile : public Error {
public:
  using Error::Error;
};

class GridMismatch : public Error {
public:
  using Error::Error;
};

class Infeasible : public Error {
public:
  Infeasible(std::string muscle, const std::string& what)
      : Error(what), muscle_(std::move(muscle)) {}
  const std::string& muscle() const noexcept { return muscle_; }

private:
  std::string muscle_;
};

/// Malformed input file content.
class ParseError : public Error {
public:
  using Error::Error;
};

class GridError : public Error {
public:
  using Error::Error;
};

class RangeError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace musim
