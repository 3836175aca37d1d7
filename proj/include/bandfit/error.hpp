#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bandfit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSizeError : public Error {
 public:
  using Error::Error;
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions disagree (e.g. convolving fields of different shape).
class SizeMismatchError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// An operation was asked to evaluate a property outside the domain where it
/// holds exactly (e.g. a frequency that is not on the DFT grid).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericalFailureError : public Error {
 public:
  using Error::Error;
};

class EmptyDataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ArchiveError : public Error {
 public:
  using Error::Error;
};

/// Malformed archive header. `offset()` is the byte offset in the file.
class ArchiveParseError : public ArchiveError {
 public:
  ArchiveParseError(const std::string& what, std::uint64_t offset)
      : ArchiveError(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class UnsupportedDtypeError : public ArchiveError {
 public:
  UnsupportedDtypeError(const std::string& tensor, const std::string& dtype)
      : ArchiveError("tensor '" + tensor + "' has unsupported dtype '" + dtype + "'"),
        tensor_(tensor),
        dtype_(dtype) {}

  const std::string& tensor() const noexcept { return tensor_; }
  const std::string& dtype() const noexcept { return dtype_; }

 private:
  std::string tensor_;
  std::string dtype_;
};

/// The payload ends before a tensor's declared byte range.
class TruncationError : public ArchiveError {
 public:
  TruncationError(const std::string& tensor, std::uint64_t needed, std::uint64_t available)
      : ArchiveError("tensor '" + tensor + "' is truncated: needs " + std::to_string(needed) +
                     " bytes, payload has " + std::to_string(available)),
        tensor_(tensor) {}

  const std::string& tensor() const noexcept { return tensor_; }

 private:
  std::string tensor_;
};

/// Byte ranges that overlap or disagree with the declared shape.
class ArchiveLayoutError : public ArchiveError {
 public:
  using ArchiveError::ArchiveError;
};

}  // namespace bandfit
