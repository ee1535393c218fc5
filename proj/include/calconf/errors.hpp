// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace calconf {

// Mirrors cc_status in calconf.h; values are part of the C ABI and the CLI exit codes.
enum class ErrorCode : int {
  kUsage = 1,
  kParse = 2,
  kValidation = 3,
  kStatistics = 4,
  kIo = 5,
  kMissingData = 6,
  kInsufficientBeams = 7,
  kDegenerateDistribution = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorCode::kUsage, what) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& record_id, const std::string& field, const std::string& what)
      : Error(ErrorCode::kValidation,
              "record '" + record_id + "', field '" + field + "': " + what),
        record_id_(record_id),
        field_(field) {}
  explicit ValidationError(const std::string& what) : Error(ErrorCode::kValidation, what) {}

  const std::string& record_id() const noexcept { return record_id_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string record_id_;
  std::string field_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

/// Correlation undefined, too few aligned pairs, or a search with no valid grid point.
class StatisticsError : public Error {
 public:
  explicit StatisticsError(const std::string& what) : Error(ErrorCode::kStatistics, what) {}
};

// Metric-level failures. score_all downgrades these to skip markers.
class MissingDataError : public Error {
 public:
  explicit MissingDataError(const std::string& what) : Error(ErrorCode::kMissingData, what) {}
};

class InsufficientBeamsError : public Error {
 public:
  explicit InsufficientBeamsError(const std::string& what)
      : Error(ErrorCode::kInsufficientBeams, what) {}
};

class DegenerateDistributionError : public Error {
 public:
  explicit DegenerateDistributionError(const std::string& what)
      : Error(ErrorCode::kDegenerateDistribution, what) {}
};

}  // namespace calconf
