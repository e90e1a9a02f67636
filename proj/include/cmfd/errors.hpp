#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cmfd {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed cell complex: bad ids, open face loops, broken incidences.
class StructuralError : public Error {
public:
  using Error::Error;
};

/// Zero-area faces, non-positive volumes, singular face-vector sets.
class DegenerateGeometry : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// The constraint matrix P does not have full row rank.
class RankDeficient : public Error {
public:
  RankDeficient(const std::string& what, std::string diagnosis)
      : Error(what), diagnosis_(std::move(diagnosis)) {}
  const std::string& diagnosis() const noexcept { return diagnosis_; }

private:
  std::string diagnosis_;
};

/// An iterative process or factorization stalled above its tolerance.
class NonConvergence : public Error {
public:
  NonConvergence(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

private:
  std::vector<double> history_;
};

}  // namespace cmfd
