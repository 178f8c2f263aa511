#include "biconserve/ambient.hpp"

#include <algorithm>

namespace biconserve {

Signature::Signature(int dim_, int index_) : dim(dim_), index(index_) {
  if (dim < 1 || index < 0 || index > dim) throw ContractViolation("invalid signature");
}

AmbientVector::AmbientVector(std::vector<double> components, Signature sig)
    : c_(std::move(components)), sig_(sig) {
  if (static_cast<int>(c_.size()) != sig_.dim)
    throw ContractViolation("ambient vector component count does not match signature");
}

AmbientVector::AmbientVector(Signature sig) : c_(sig.dim, 0.0), sig_(sig) {}

double AmbientVector::euclidean_norm() const {
  double s = 0.0;
  for (double x : c_) s += x * x;
  return std::sqrt(s);
}

std::string to_string(CausalCharacter c) {
  switch (c) {
    case CausalCharacter::Spacelike:
      return "spacelike";
    case CausalCharacter::Timelike:
      return "timelike";
    case CausalCharacter::Lightlike:
      return "lightlike";
  }
  return "?";
}

double inner(const AmbientVector& u, const AmbientVector& v) {
  if (!(u.signature() == v.signature())) throw ContractViolation("inner product: signature mismatch");
  return inner(u.components(), v.components(), u.signature());
}

Causality causal_character(const AmbientVector& v, double null_tolerance) {
  if (!(null_tolerance > 0.0)) throw ContractViolation("null tolerance must be positive");
  const double e2 = v.euclidean_norm() * v.euclidean_norm();
  if (e2 == 0.0) return {CausalCharacter::Lightlike, true};
  const double q = inner(v, v);
  if (std::abs(q) <= null_tolerance * e2) return {CausalCharacter::Lightlike, false};
  return {q > 0 ? CausalCharacter::Spacelike : CausalCharacter::Timelike, false};
}

AmbientVector metric_cross(std::span<const AmbientVector> tangents, double rank_tolerance) {
  if (tangents.empty()) throw ContractViolation("metric_cross needs tangent vectors");
  const Signature sig = tangents.front().signature();
  std::vector<std::vector<double>> rows;
  double scale = 1.0;
  for (const auto& t : tangents) {
    if (!(t.signature() == sig)) throw ContractViolation("metric_cross: signature mismatch");
    rows.emplace_back(t.components().begin(), t.components().end());
    scale *= t.euclidean_norm();
  }
  auto w = metric_cross(std::span<const std::vector<double>>(rows), sig);
  const double largest = std::abs(*std::max_element(w.begin(), w.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  }));
  if (scale == 0.0 || largest <= rank_tolerance * scale)
    throw DegenerateFrame("metric_cross: tangent vectors are linearly dependent");
  return AmbientVector(std::move(w), sig);
}

}  // namespace biconserve
