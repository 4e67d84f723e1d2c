#ifndef XNESTCV_ERRORS_HPP
#define XNESTCV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace xnestcv {

// Base class for all library failures. CLI maps these to exit codes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& msg) : Error(msg) {}
};

class InvalidLambda : public Error {
 public:
  explicit InvalidLambda(const std::string& msg) : Error(msg) {}
};

// I - H restricted to a test block is numerically singular. Carries the
// offending unit (or first unit of the partition) when known.
class SingularTestBlock : public Error {
 public:
  explicit SingularTestBlock(const std::string& msg, long index = -1)
      : Error(msg), index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

class TooManyPartitions : public Error {
 public:
  explicit TooManyPartitions(const std::string& msg) : Error(msg) {}
};

class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& msg) : Error(msg) {}
};

class NoFeasibleLambda : public Error {
 public:
  explicit NoFeasibleLambda(const std::string& msg, long index = -1)
      : Error(msg), index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

class InvalidFolds : public Error {
 public:
  explicit InvalidFolds(const std::string& msg) : Error(msg) {}
};

class UndefinedDelta : public Error {
 public:
  explicit UndefinedDelta(const std::string& msg) : Error(msg) {}
};

// Malformed cell in an input file; coordinates are 1-based for reporting.
class IngestError : public Error {
 public:
  IngestError(const std::string& msg, long row = -1, long col = -1)
      : Error(msg), row_(row), col_(col) {}
  long row() const { return row_; }
  long col() const { return col_; }

 private:
  long row_;
  long col_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace xnestcv

#endif  // XNESTCV_ERRORS_HPP
