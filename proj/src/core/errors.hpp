#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dircast {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientVotes : public Error {
 public:
  InsufficientVotes(std::size_t got, std::size_t need)
      : Error("insufficient votes: got " + std::to_string(got) + ", need " + std::to_string(need)),
        got(got),
        need(need) {}
  std::size_t got;
  std::size_t need;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

class DigestMismatch : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dircast
