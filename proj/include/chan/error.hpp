#pragma once

#include <stdexcept>
#include <string>

namespace chan {

// Base of every error thrown by the library. Callers that only need a
// message can catch this; the subclasses carry structured context.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform for a tensor operation.
class ShapeError : public Error {
 public:
  ShapeError(std::string op, std::string lhs, std::string rhs, const std::string& detail = {})
      : Error(op + ": shape mismatch " + lhs + " vs " + rhs + (detail.empty() ? "" : " (" + detail + ")")),
        op_(std::move(op)),
        lhs_(std::move(lhs)),
        rhs_(std::move(rhs)) {}

  const std::string& op() const noexcept { return op_; }
  const std::string& lhs_shape() const noexcept { return lhs_; }
  const std::string& rhs_shape() const noexcept { return rhs_; }

 private:
  std::string op_;
  std::string lhs_;
  std::string rhs_;
};

// An argument is outside the domain an operation accepts.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent on-disk data.
class FormatError : public Error {
 public:
  enum class Kind { kBadMagic, kBadVersion, kTruncated, kNonFinite, kSchema, kIo };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace chan
