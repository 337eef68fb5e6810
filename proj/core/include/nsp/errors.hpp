#pragma once

#include <stdexcept>
#include <string>

namespace nsp {

// Failure categories. The CLI maps these onto process exit codes, so the
// numeric values are part of the tool's contract.
enum class ErrorKind {
  InvalidArgument,   // bad config / precondition violated by caller
  InvalidFrequency,
  Unstable,
  NonFinite,
  TooShort,
  ShapeMismatch,
  UnknownChannel,
  InsufficientSamples,
  Degenerate,
  Divergence,
  EmptySplit,
  IdMismatch,
  MissingSoftTarget,
  ClassTooSmall,
  CorruptFile,
  MissingArtifact,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the NSPF reader; carries the byte offset where decoding failed.
class CorruptFileError : public Error {
 public:
  CorruptFileError(const std::string& what, std::size_t offset)
      : Error(ErrorKind::CorruptFile,
              what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace nsp
