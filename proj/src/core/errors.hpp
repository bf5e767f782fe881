#ifndef SMVR_CORE_ERRORS_HPP
#define SMVR_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace smvr {

// Caller broke a documented precondition (bad shape, beta outside [0,1], ...).
class ContractError : public std::invalid_argument {
 public:
  explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

// A level function left its mathematical domain (sqrt of a negative, log of
// a non-positive value, non-finite intermediate). Carries the level index.
class DomainError : public std::runtime_error {
 public:
  DomainError(int level, const std::string& what)
      : std::runtime_error("level " + std::to_string(level) + ": " + what),
        level_(level) {}
  int level() const { return level_; }

 private:
  int level_;
};

// Invalid problem/run configuration (empty dataset, missing constants, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file. line() is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(long line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace smvr

#endif
