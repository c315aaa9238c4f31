#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pgen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed caller input: bad config values, unreadable files, foreign roots.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Transport failure or retry exhaustion talking to a live endpoint.
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

// The endpoint answered with a non-retryable error status.
class BackendRejected : public Error {
 public:
  BackendRejected(int status, const std::string& what)
      : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// Model output never satisfied the requested JSON shape. Carries the last
// raw reply so callers can log or inspect it.
class SchemaViolation : public Error {
 public:
  SchemaViolation(const std::string& what, std::string raw_reply)
      : Error(what), raw_reply_(std::move(raw_reply)) {}
  const std::string& raw_reply() const { return raw_reply_; }

 private:
  std::string raw_reply_;
};

// Judge reply parsed but failed rubric validation (missing key, score out
// of [1,5]). A kind of schema violation so generic handlers still apply.
class JudgeFailure : public SchemaViolation {
 public:
  using SchemaViolation::SchemaViolation;
};

// Every taxonomy node reachable under the breadth-first gate is consumed.
class TaxonomyExhausted : public Error {
 public:
  using Error::Error;
};

// A survey question collected zero valid answers.
class EmptyHistogram : public Error {
 public:
  using Error::Error;
};

}  // namespace pgen
