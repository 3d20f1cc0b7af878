#pragma once

#include <stdexcept>
#include <string>

namespace cohref {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number when known.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class LexiconError : public Error {
 public:
  using Error::Error;
};

// Every candidate patch has zero applicability for a term.
class DegenerateEvidence : public Error {
 public:
  using Error::Error;
};

class ExhaustedLexicon : public Error {
 public:
  using Error::Error;
};

class UnknownTerm : public Error {
 public:
  using Error::Error;
};

class InterpretationError : public Error {
 public:
  using Error::Error;
};

class GrammarError : public Error {
 public:
  using Error::Error;
};

class DiscourseError : public Error {
 public:
  using Error::Error;
};

class SessionError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace cohref
