#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nvmdse {

/// Base of every error raised by the library. `code()` is a stable
/// identifier suitable for tests and CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Error tied to a named field of a document (bitcell/tech files, CSV columns).
class FieldError : public Error {
 public:
  FieldError(std::string code, std::string field, const std::string& detail = {})
      : Error(std::move(code), detail.empty() ? field : field + " (" + detail + ")"),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct MissingField : FieldError {
  explicit MissingField(std::string field) : FieldError("MissingField", std::move(field)) {}
};

struct NonPositiveValue : FieldError {
  NonPositiveValue(std::string field, const std::string& detail = {})
      : FieldError("NonPositiveValue", std::move(field), detail) {}
};

struct UnknownMemoryKind : FieldError {
  explicit UnknownMemoryKind(const std::string& name)
      : FieldError("UnknownMemoryKind", "kind", name) {}
};

struct InvalidValue : FieldError {
  InvalidValue(std::string field, const std::string& detail)
      : FieldError("InvalidValue", std::move(field), detail) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error("ParseError", what) {}
};

struct InfeasibleCapacity : Error {
  explicit InfeasibleCapacity(const std::string& what) : Error("InfeasibleCapacity", what) {}
};

struct InfeasibleOrganization : Error {
  explicit InfeasibleOrganization(const std::string& what)
      : Error("InfeasibleOrganization", what) {}
};

struct CalibrationDiverged : Error {
  CalibrationDiverged(const std::string& what, double max_error)
      : Error("CalibrationDiverged", what), max_error_(max_error) {}

  double max_error() const noexcept { return max_error_; }

 private:
  double max_error_;
};

/// Row is 1-based over data rows (the header is row 0).
class SchemaError : public Error {
 public:
  SchemaError(std::size_t row, std::string column, const std::string& detail)
      : Error("SchemaError", "row " + std::to_string(row) + ", column '" + column + "': " + detail),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

struct NegativeCount : Error {
  NegativeCount(std::size_t row, const std::string& column)
      : Error("NegativeCount", "row " + std::to_string(row) + ", column '" + column + "'") {}
};

class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line, const std::string& detail)
      : Error("MalformedRecord", "line " + std::to_string(line) + ": " + detail), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct CapacityMismatch : Error {
  explicit CapacityMismatch(const std::string& what) : Error("CapacityMismatch", what) {}
};

struct NoFeasibleCapacity : Error {
  explicit NoFeasibleCapacity(const std::string& what) : Error("NoFeasibleCapacity", what) {}
};

struct EmptyTrace : Error {
  EmptyTrace() : Error("EmptyTrace", "trace has no records") {}
};

struct NoBaseTraffic : Error {
  NoBaseTraffic() : Error("NoBaseTraffic", "baseline configuration produced zero DRAM transactions") {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error("IoError", what) {}
};

struct FileNotFound : Error {
  explicit FileNotFound(const std::string& path) : Error("FileNotFound", path) {}
};

}  // namespace nvmdse
