#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace paraug {

// Input that cannot be read or parsed. Config errors derive from it.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Parse failure at a known location in a text file.
class ParseError : public InputError {
public:
  ParseError(const std::string& what, std::size_t line)
      : InputError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  ParseError(const std::string& what) : InputError(what), line_(0) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class ConfigError : public InputError {
public:
  using InputError::InputError;
};

class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class StaleCacheError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace paraug
