#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biconserve/box.hpp"
#include "biconserve/expression.hpp"

namespace biconserve {

/// Scalar function of one variable that can report its own derivatives.
class Profile {
 public:
  virtual ~Profile() = default;
  /// {f(s), f'(s), ..., f^(order)(s)}.
  virtual std::vector<double> derivatives(double s, int order) const = 0;
  virtual int max_order() const { return kMaxJetOrder; }
  virtual std::string describe() const = 0;

  double value(double s) const { return derivatives(s, 0)[0]; }
};

using ProfilePtr = std::shared_ptr<const Profile>;

/// Read-only name -> profile table consulted by expression evaluation.
class ProfileBank {
 public:
  void set(const std::string& name, ProfilePtr profile);
  bool contains(std::string_view name) const;
  const Profile& get(std::string_view name) const;
  ProfilePtr shared(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, ProfilePtr, std::less<>> entries_;
};

/// Profile given by a closed-form expression in the single variable `s`.
class ExpressionProfile final : public Profile {
 public:
  explicit ExpressionProfile(Expr e, std::string source = {});
  static std::shared_ptr<const ExpressionProfile> parse(std::string_view text);

  std::vector<double> derivatives(double s, int order) const override;
  std::string describe() const override;
  const Expr& expression() const { return e_; }

 private:
  Expr e_;
  std::string source_;
  ProfileBank empty_;
};

/// Constraint tying a profile pair together.
///   Sum1:      phi'^2 + psi'^2 = 1   (phi' = cos th,  psi' = sin th)
///   DiffPlus:  phi'^2 - psi'^2 = 1   (phi' = cosh th, psi' = sinh th)
///   DiffMinus: phi'^2 - psi'^2 = -1  (phi' = sinh th, psi' = cosh th)
enum class PairKind { Sum1, DiffPlus, DiffMinus };

std::string to_string(PairKind k);
PairKind pair_kind_from_string(std::string_view s);

/// |phi'^2 +- psi'^2 -+ 1| at s.
double pair_constraint_residual(PairKind kind, const Profile& phi, const Profile& psi, double s);

/// f(s) = f0 + integral_{s0}^{s} g(theta(x)) dx with g one of cos, sin,
/// cosh, sinh. Values come from adaptive Gauss-Kronrod quadrature;
/// derivatives from jets of g(theta).
class IntegratedProfile final : public Profile {
 public:
  enum class Kernel { Cos, Sin, Cosh, Sinh };

  IntegratedProfile(Kernel kernel, Expr theta, double s0, double f0);

  std::vector<double> derivatives(double s, int order) const override;
  std::string describe() const override;

 private:
  double integrand(double x) const;

  Kernel kernel_;
  Expr theta_;
  double s0_;
  double f0_;
  ProfileBank empty_;
};

struct ProfilePair {
  ProfilePtr phi;
  ProfilePtr psi;
};

/// Admissible pair satisfying `kind` exactly through the angle function
/// theta(s) (an expression in `s`), with phi(s0) = phi0 and psi(s0) = psi0.
ProfilePair make_profile_pair(PairKind kind, const Expr& theta, double s0 = 0.0, double phi0 = 0.0,
                              double psi0 = 0.0);

/// Closed-form biconservative profile for the four-curvature family and its
/// extension to more axes:
///   psi(s) = s/2 + c * integral_0^s |P(x)|^(2/3) dx,  P(x) = prod_i (x + o_i).
/// For the a, b family the offsets are (0, 2a, 2b). The exponent does not
/// depend on the number of offsets: k1 = -(n/2) H reduces to
/// 3 psi'' / (2 psi' - 1) = sum_i 1 / (s + o_i) in every dimension.
///
/// Values at Chebyshev nodes come from composite 16-point Gauss-Legendre;
/// other points use barycentric interpolation on those nodes. Derivatives
/// always use the analytic closed form.
class PsiSolution final : public Profile {
 public:
  PsiSolution(std::vector<double> offsets, double c, Interval s_range, int n_nodes);

  std::vector<double> derivatives(double s, int order) const override;
  std::string describe() const override;

  std::span<const double> offsets() const { return offsets_; }
  double c() const { return c_; }
  double exponent() const { return exponent_; }
  Interval s_range() const { return range_; }
  std::span<const double> s_grid() const { return nodes_; }
  std::span<const double> psi() const { return psi_; }
  std::span<const double> dpsi() const { return dpsi_; }
  std::span<const double> d2psi() const { return d2psi_; }
  int interpolation_order() const { return static_cast<int>(nodes_.size()) - 1; }

  /// psi computed by quadrature directly, bypassing the interpolant.
  double integrate_to(double s) const;

 private:
  double interpolate(double s) const;

  std::vector<double> offsets_;
  double c_;
  double exponent_;
  Interval range_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> psi_;
  std::vector<double> dpsi_;
  std::vector<double> d2psi_;
};

using PsiPtr = std::shared_ptr<const PsiSolution>;

/// psi for offsets (0, 2a, 2b); requires a != 0, c != 0 and
/// s (s + 2a)(s + 2b) > 0 on the whole range.
PsiPtr solve_psi(double a, double b, double c, Interval s_range, int n_nodes = 32);

/// General form; `offsets` are the shifts o_i themselves.
PsiPtr solve_psi_general(std::vector<double> offsets, double c, Interval s_range, int n_nodes = 32);

/// |3 psi'' / (2 psi' - 1) - (1/s + 1/(s+2a) + 1/(s+2b))|.
double psi_ode_residual(const Profile& psi, double a, double b, double s);

/// |3 psi'' / (2 psi' - 1) - sum_i 1/(s + o_i)|.
double psi_ode_residual_general(const Profile& psi, std::span<const double> offsets, double s);

}  // namespace biconserve
