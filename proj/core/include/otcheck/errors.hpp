#pragma once

#include <stdexcept>
#include <string>

namespace otcheck {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two fields/measures do not live on the same grid.
struct DomainMismatch : Error {
  using Error::Error;
};

/// Total masses differ beyond the relative tolerance required by the operation.
struct MassMismatch : Error {
  using Error::Error;
};

/// A signed density fed to the dual norm has nonzero total mass.
struct NonZeroMass : Error {
  using Error::Error;
};

/// An iterative solver hit its iteration cap before reaching tolerance.
struct NoConvergence : Error {
  using Error::Error;
};

/// The transport instance exceeds the configured cell-pair cap.
struct ProblemTooLarge : Error {
  using Error::Error;
};

/// A cell-wise domination hypothesis (mu' >= rho * mu) does not hold.
struct DominationViolated : Error {
  using Error::Error;
};

/// A check's stated hypothesis is violated by the supplied instance.
struct HypothesisViolated : Error {
  using Error::Error;
};

/// Malformed argument (generator parameters, indices, tolerances, ...).
struct InvalidArgument : Error {
  using Error::Error;
};

/// Experiment configuration failed to parse or validate.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace otcheck
