#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace cefr {

/// Base class for all errors raised by the toolkit. The category drives the
/// CLI exit code and the HTTP status used by the assessment service.
class Error : public std::runtime_error {
 public:
  enum class Kind { kParse, kData, kConfig, kUsage, kUpstream, kStatistic };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Malformed input text; carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : Error(Kind::kParse, "line " + std::to_string(line) + ": " + msg), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(Kind::kData, msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(Kind::kConfig, msg) {}
};

/// A statistic is undefined for the given sample (e.g. zero variance everywhere).
class StatisticError : public Error {
 public:
  explicit StatisticError(const std::string& msg) : Error(Kind::kStatistic, msg) {}
};

/// Failure talking to an external tagger or corrector.
class UpstreamError : public Error {
 public:
  UpstreamError(std::string upstream, const std::string& msg, bool retriable)
      : Error(Kind::kUpstream, upstream + ": " + msg),
        upstream_(std::move(upstream)),
        retriable_(retriable) {}

  const std::string& upstream() const { return upstream_; }
  bool retriable() const { return retriable_; }

 private:
  std::string upstream_;
  bool retriable_;
};

}  // namespace cefr
