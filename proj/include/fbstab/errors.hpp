#pragma once

#include <stdexcept>
#include <string>

namespace fbstab {

/// Base class of every domain error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geometry
struct NonPositiveProfile : Error { using Error::Error; };
struct NotPeriodic : Error { using Error::Error; };

struct EndpointConditionViolated : Error {
  EndpointConditionViolated(int derivative_index, double endpoint, double value)
      : Error("bump endpoint condition violated: derivative " +
              std::to_string(derivative_index) + " at x=" + std::to_string(endpoint) +
              " evaluates to " + std::to_string(value)),
        derivative(derivative_index), endpoint(endpoint) {}
  int derivative;
  double endpoint;
};

// elliptic
struct SolverDiverged : Error { using Error::Error; };
struct GridTooSmall : Error { using Error::Error; };

// flow
struct NoHitDetected : Error { using Error::Error; };
struct StepCountTooSmall : Error { using Error::Error; };
struct UndefinedAtZero : Error { using Error::Error; };
struct NotAZero : Error { using Error::Error; };
struct CutoffInfeasible : Error { using Error::Error; };
struct NotInjective : Error { using Error::Error; };

// variation / harness
struct NotCritical : Error { using Error::Error; };
struct QminViolated : Error { using Error::Error; };
struct EpsilonTooLarge : Error { using Error::Error; };
struct NotCoercive : Error { using Error::Error; };
struct TooFewSamples : Error { using Error::Error; };

// cli
struct ConfigInvalid : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace fbstab
