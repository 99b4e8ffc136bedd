// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace fgq {

// Every error raised by the library derives from Error so callers can catch
// the whole family at once; the CLI maps any Error to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed bytes: bad magic, truncated stream, reserved codes, bad header.
class FormatError : public Error {
 public:
  using Error::Error;
};

class UnknownVersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Well-formed input in a layout we do not accept (rank, dtype, order).
class UnsupportedLayoutError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise invalid numeric data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Argument outside the operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class PrecisionError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fgq
