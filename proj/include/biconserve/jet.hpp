#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace biconserve {

inline constexpr int kMaxJetOrder = 4;
inline constexpr int kMaxJetVars = 8;

/// Truncated multivariate Taylor expansion of a scalar.
///
/// Coefficients are stored in graded-lexicographic order of the multi-index
/// (all |a| = 0 entries, then |a| = 1, ...), so a jet of order k uses a prefix
/// of the layout of any higher order with the same variable count. Internally
/// the stored numbers are Taylor coefficients f^(a)/a!; `partial` converts
/// back to plain partial derivatives.
class Jet {
 public:
  Jet() = default;
  Jet(int nvars, int order);

  static Jet constant(int nvars, int order, double value);
  static Jet variable(int nvars, int order, int var, double at);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  double value() const { return coeffs_.empty() ? 0.0 : coeffs_[0]; }
  std::span<const double> coefficients() const { return coeffs_; }
  double coefficient(std::size_t i) const { return coeffs_[i]; }
  double& coefficient(std::size_t i) { return coeffs_[i]; }

  /// Partial derivative d^alpha f at the expansion point; |alpha| <= order.
  double partial(std::span<const int> alpha) const;

  /// d/dx_var of the expansion, one order lower.
  Jet derivative(int var) const;
  Jet truncated(int order) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator+=(double c);
  Jet& operator-=(double c);
  Jet& operator*=(double c);
  Jet& operator/=(double c);
  Jet operator-() const;

  static std::size_t coefficient_count(int nvars, int order);
  static std::size_t index_of(int nvars, std::span<const int> alpha);
  static std::vector<int> multi_index(int nvars, std::size_t index);

 private:
  int nvars_ = 0;
  int order_ = 0;
  std::vector<double> coeffs_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, double c);
Jet operator+(double c, Jet a);
Jet operator-(Jet a, double c);
Jet operator-(double c, const Jet& a);
Jet operator*(Jet a, double c);
Jet operator*(double c, Jet a);
Jet operator/(Jet a, double c);
Jet operator/(double c, const Jet& a);

/// f(g) given derivs[k] = f^(k)(g.value()) for k = 0..g.order().
Jet compose(const Jet& g, std::span<const double> derivs);

Jet reciprocal(const Jet& g);
Jet sin(const Jet& g);
Jet cos(const Jet& g);
Jet sinh(const Jet& g);
Jet cosh(const Jet& g);
Jet exp(const Jet& g);
Jet sqrt(const Jet& g);
Jet pow(const Jet& g, double exponent);

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

}  // namespace biconserve
