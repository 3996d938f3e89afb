#pragma once

#include <stdexcept>
#include <string>

namespace eil {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parameter outside the domain of an open arc.
struct DomainError : Error {
  using Error::Error;
};

/// Affine invariants undefined: |kappa| below the inflection threshold.
struct InflectionError : Error {
  using Error::Error;
};

/// Conormal decomposition requires transversal tangents.
struct ParallelTangentsError : Error {
  using Error::Error;
};

/// iptl_point called on a pair whose tangents are not parallel.
struct NotParallel : Error {
  using Error::Error;
};

struct SingularMapError : Error {
  using Error::Error;
};

struct DegenerateLineError : Error {
  using Error::Error;
};

/// No zero-crossing cells survive the exclusion bands (legitimate outcome,
/// e.g. the transversal locus of a circle at alpha != 1/2).
struct NoBranchFound : Error {
  using Error::Error;
};

/// The residual vanishes on an open region (circle at alpha = 1/2).
struct DegenerateResidual : Error {
  using Error::Error;
};

/// Envelope point at infinity: the closed-form denominator vanished.
struct DenominatorDegenerate : Error {
  using Error::Error;
};

/// Envelope point requested for a pair that does not satisfy G = 0.
struct PairingViolated : Error {
  using Error::Error;
};

struct ConsecutiveParallel : Error {
  using Error::Error;
};

struct PreconditionViolated : Error {
  using Error::Error;
};

/// Cusp candidate not isolated at the current branch sampling.
struct InsufficientResolution : Error {
  using Error::Error;
};

/// Richardson levels disagree beyond 10% on the deciding derivative.
struct InsufficientPrecision : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

/// A domain-type invariant was violated (e.g. b0 <= 0 in a Monge jet pair).
struct InvariantViolation : Error {
  using Error::Error;
};

}  // namespace eil
