#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace adaptrom {

enum class ErrorKind {
  invalid_parameter,
  invalid_hierarchy,
  assembly,
  factorization,
  non_convergence,
  dimension_mismatch,
  out_of_domain,
  rank_deficient,
  io,
  unknown_method,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Newton failure; carries the residual norms of every iteration.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> history)
      : Error(ErrorKind::non_convergence, what), history_(std::move(history)) {}

  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

#define ADAPTROM_REQUIRE(cond, kind, msg)              \
  do {                                                 \
    if (!(cond)) throw ::adaptrom::Error((kind), (msg)); \
  } while (false)

}  // namespace adaptrom
