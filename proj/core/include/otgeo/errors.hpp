#pragma once

#include <stdexcept>
#include <string>

namespace otgeo {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A point lies outside a cost's domain or inside its excluded set.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A finite-difference stencil would touch the excluded set.
class SingularStencil : public DomainError {
 public:
  explicit SingularStencil(const std::string& msg) : DomainError(msg) {}
};

/// Derivative order above 4 or above what the cost declares.
class OrderError : public Error {
 public:
  explicit OrderError(const std::string& msg) : Error(msg) {}
};

class ZeroVector : public Error {
 public:
  explicit ZeroVector(const std::string& msg) : Error(msg) {}
};

/// The mixed-derivative block is numerically singular where an
/// operation requires it invertible.
class DegenerateMetric : public Error {
 public:
  explicit DegenerateMetric(const std::string& msg) : Error(msg) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

/// Source and target masses do not balance.
class InfeasibleMass : public Error {
 public:
  explicit InfeasibleMass(const std::string& msg) : Error(msg) {}
};

/// A plan's support cannot carry consistent dual potentials.
class DisconnectedSupport : public Error {
 public:
  explicit DisconnectedSupport(const std::string& msg) : Error(msg) {}
};

/// An exact enumeration exceeded its configured node budget.
class ComplexityGuard : public Error {
 public:
  explicit ComplexityGuard(const std::string& msg) : Error(msg) {}
};

/// Scenario/configuration schema violation. Carries the offending field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& msg)
      : Error(field.empty() ? msg : field + ": " + msg), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IOError : public Error {
 public:
  explicit IOError(const std::string& msg) : Error(msg) {}
};

}  // namespace otgeo
