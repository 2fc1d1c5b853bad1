#pragma once

#include <stdexcept>
#include <string>

namespace colddiff {

/// Non-finite values or a failed numerical routine.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required input (file, directory, dataset) does not exist.
class MissingInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed bytes in a binary or text file.
class FormatError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, truncated, dimension_mismatch, bad_version, bad_value };

  FormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_{kind} {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace colddiff
