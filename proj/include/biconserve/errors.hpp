#pragma once

#include <stdexcept>
#include <string>

namespace biconserve {

// Base for every failure raised by the geometry kernels. The CLI maps any of
// these to exit code 2.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (mismatched dimensions, orders
// out of range, non-self-adjoint input, ...).
class ContractViolation : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

// Evaluation left the domain of a guarded node (division by ~0, non-positive
// base of a fractional power, pole of an ODE, singular chart domain).
class DomainError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

// A side condition attached to a catalog case does not hold on the domain.
class ConstraintError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

class DegenerateFrame : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

class DegenerateMetric : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

class DegenerateNormal : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

class UnexpectedIndex : public GeometryError {
 public:
  UnexpectedIndex(int found, int expected)
      : GeometryError("induced metric has index " + std::to_string(found) +
                      ", expected " + std::to_string(expected)),
        found_(found),
        expected_(expected) {}
  int found() const { return found_; }
  int expected() const { return expected_; }

 private:
  int found_;
  int expected_;
};

// Mean curvature is constant over every sampled point, so the biconservative
// condition holds vacuously and carries no information.
class CMCDetected : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

}  // namespace biconserve
