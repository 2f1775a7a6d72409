#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace boys {

// Argument outside the domain of the function (negative or NaN x, bad order).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative reference computation did not reach the requested accuracy.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A fitted approximation violates an acceptance rule (negative leading
// denominator coefficient, pole on the half line, ...).
class FitRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The optimizer did not converge.
class NoSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Root refinement could not reproduce the polynomial it factors.
class RootRefinementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class MissingOrder : public std::out_of_range {
 public:
  explicit MissingOrder(int n) : std::out_of_range("no solution for order n=" + std::to_string(n)), n_(n) {}
  int order() const { return n_; }

 private:
  int n_;
};

// Batch input rejected as a whole; lists every offending index.
class BatchDomainError : public DomainError {
 public:
  explicit BatchDomainError(std::vector<std::size_t> bad);
  const std::vector<std::size_t>& indices() const { return bad_; }

 private:
  std::vector<std::size_t> bad_;
};

}  // namespace boys
