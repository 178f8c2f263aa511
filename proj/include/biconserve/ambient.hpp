#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "biconserve/errors.hpp"
#include "biconserve/jet.hpp"

namespace biconserve {

/// Flat metric of dimension `dim` with the first `index` axes negative.
struct Signature {
  int dim = 5;
  int index = 2;

  Signature() = default;
  Signature(int dim_, int index_);

  double weight(int i) const { return i < index ? -1.0 : 1.0; }
  bool operator==(const Signature&) const = default;
};

class AmbientVector {
 public:
  AmbientVector(std::vector<double> components, Signature sig);
  explicit AmbientVector(Signature sig);

  const Signature& signature() const { return sig_; }
  int dim() const { return sig_.dim; }
  std::span<const double> components() const { return c_; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }

  double euclidean_norm() const;

 private:
  std::vector<double> c_;
  Signature sig_;
};

enum class CausalCharacter { Spacelike, Timelike, Lightlike };

struct Causality {
  CausalCharacter character;
  bool degenerate = false;  // zero vector
};

inline constexpr double kDefaultNullTolerance = 1e-9;
inline constexpr double kDefaultRankTolerance = 1e-12;

std::string to_string(CausalCharacter c);

/// Indefinite inner product over raw component spans; works for any scalar
/// type with + and * (double, Jet).
template <class T>
T inner(std::span<const T> u, std::span<const T> v, const Signature& sig) {
  if (static_cast<int>(u.size()) != sig.dim || static_cast<int>(v.size()) != sig.dim)
    throw ContractViolation("inner product: dimension mismatch");
  T acc = u[0] * v[0] * sig.weight(0);
  for (int i = 1; i < sig.dim; ++i) {
    if (sig.weight(i) < 0)
      acc -= u[i] * v[i];
    else
      acc += u[i] * v[i];
  }
  return acc;
}

double inner(const AmbientVector& u, const AmbientVector& v);

Causality causal_character(const AmbientVector& v, double null_tolerance = kDefaultNullTolerance);

/// Determinant by Gaussian elimination with partial pivoting on values. The
/// matrix is row-major n x n and consumed.
template <class T>
T determinant(std::vector<T> a, int n) {
  T det = a[0] * 0.0 + 1.0;
  double sign = 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(value_of(a[col * n + col]));
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(value_of(a[r * n + col]));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0) return a[0] * 0.0;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      sign = -sign;
    }
    det = det * a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const T f = a[r * n + col] / a[col * n + col];
      for (int c = col + 1; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
    }
  }
  return det * sign;
}

/// Vector metrically orthogonal to the m-1 given vectors of an m-dimensional
/// ambient space: cofactor expansion of [basis; t_1; ...; t_{m-1}] with the
/// index lowered by the signature weights. Not normalized. Swapping two
/// inputs flips the sign.
template <class T>
std::vector<T> metric_cross(std::span<const std::vector<T>> tangents, const Signature& sig) {
  const int m = sig.dim;
  const int d = m - 1;
  if (static_cast<int>(tangents.size()) != d)
    throw ContractViolation("metric_cross needs dim-1 tangent vectors");
  for (const auto& t : tangents)
    if (static_cast<int>(t.size()) != m) throw ContractViolation("metric_cross: dimension mismatch");
  std::vector<T> w;
  w.reserve(m);
  std::vector<T> minor;
  for (int k = 0; k < m; ++k) {
    minor.clear();
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < m; ++c)
        if (c != k) minor.push_back(tangents[r][c]);
    T cof = determinant(std::move(minor), d);
    if (k % 2 == 1) cof = -cof;
    cof *= sig.weight(k);
    w.push_back(std::move(cof));
  }
  return w;
}

/// Double-valued convenience wrapper with the rank check.
AmbientVector metric_cross(std::span<const AmbientVector> tangents,
                           double rank_tolerance = kDefaultRankTolerance);

}  // namespace biconserve
