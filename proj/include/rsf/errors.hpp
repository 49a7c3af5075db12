#ifndef RSF_ERRORS_HPP
#define RSF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rsf {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid parameters, configuration, or preconditions.
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Forward-model evaluation left its domain (overflowing slip rate,
/// non-positive state variable, non-finite values).
class ModelDomainError : public Error {
public:
  ModelDomainError(const std::string& msg, double t = 0.0) : Error(msg), time(t) {}
  double time; // simulation time at which the violation occurred
};

/// Time integration failed (step-size underflow, state invariant broken).
/// Carries the last time the solver had a valid state.
class SolverError : public Error {
public:
  SolverError(const std::string& msg, double t_last) : Error(msg), last_good_time(t_last) {}
  double last_good_time;
};

/// Fitting, posterior evaluation, or sampling failed.
class InversionError : public Error {
public:
  explicit InversionError(const std::string& msg) : Error(msg) {}
};

/// File parsing or persistence failure.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace rsf

#endif
