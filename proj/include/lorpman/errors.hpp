// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lorpman {

/// Category of a library failure. The C API maps each kind onto a status code.
enum class ErrorKind {
  kContract,     // shape / length / precondition mismatch
  kParameter,    // invalid user-supplied parameter
  kDegenerate,   // mathematically undefined input (zero vector, empty set)
  kNumeric,      // non-finite value produced
  kUnsupported,  // operation not available in this mode
  kIo,
  kParse,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what)
      : Error(ErrorKind::kContract, what) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what)
      : Error(ErrorKind::kParameter, what) {}
};

class DegenerateInput : public Error {
 public:
  explicit DegenerateInput(const std::string& what)
      : Error(ErrorKind::kDegenerate, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::kNumeric, what) {}
};

class UnsupportedMode : public Error {
 public:
  explicit UnsupportedMode(const std::string& what)
      : Error(ErrorKind::kUnsupported, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what)
      : Error(ErrorKind::kParse, what) {}
};

}  // namespace lorpman
