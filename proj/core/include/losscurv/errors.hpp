#ifndef LOSSCURV_ERRORS_HPP_
#define LOSSCURV_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace losscurv {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller-supplied arguments violate a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A field evaluation produced a non-finite value or could not be performed.
class EvaluationFailure : public Error {
 public:
  using Error::Error;
};

// A matrix required to be PSD has an eigenvalue below -tolerance.
class NotPositiveSemidefinite : public Error {
 public:
  NotPositiveSemidefinite(const std::string& msg, double min_eigenvalue)
      : Error(msg), min_eigenvalue(min_eigenvalue) {}
  double min_eigenvalue;
};

// Geodesic integration could not proceed (step underflow, non-finite state).
class GeodesicFailure : public Error {
 public:
  using Error::Error;
};

// An SDE path diverged during simulation.
class IntegrationUnstable : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss; carries the offending step index.
class DivergedTraining : public Error {
 public:
  DivergedTraining(const std::string& msg, int step) : Error(msg), step(step) {}
  int step;
};

// A trace-normalized quantity was requested for a traceless matrix.
class DegenerateTrace : public Error {
 public:
  using Error::Error;
};

}  // namespace losscurv

#endif  // LOSSCURV_ERRORS_HPP_
