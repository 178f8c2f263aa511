#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biconserve/jet.hpp"

namespace biconserve {

class ProfileBank;

enum class ExprOp {
  Constant,
  Variable,
  Profile,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,
  Sin,
  Cos,
  Sinh,
  Cosh,
  Exp,
  Sqrt,
};

/// Immutable term tree over chart parameters, constants and named profile
/// functions. Cheap to copy (shared nodes).
class Expr {
 public:
  struct Node {
    ExprOp op = ExprOp::Constant;
    double constant = 0.0;  // Constant value, or exponent for Pow
    int variable = -1;
    std::string name;  // variable or profile name
    std::vector<Expr> args;
  };

  Expr(double c);  // NOLINT: constants convert implicitly
  explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

  static Expr variable(int index, std::string name);
  static Expr profile(std::string name, Expr argument);
  static Expr unary(ExprOp op, Expr a);
  static Expr binary(ExprOp op, Expr a, Expr b);

  const Node& node() const { return *n_; }
  ExprOp op() const { return n_->op; }
  bool is_constant() const { return n_->op == ExprOp::Constant; }

  std::string to_string() const;

 private:
  std::shared_ptr<const Node> n_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, double exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr sinh(const Expr& a);
Expr cosh(const Expr& a);
Expr exp(const Expr& a);
Expr sqrt(const Expr& a);

inline constexpr double kDivisionGuard = 1e-12;

/// Exact Taylor jet of `expr` at `point` in point.size() variables.
Jet jet_eval(const Expr& expr, std::span<const double> point, int order, const ProfileBank& bank);

double evaluate(const Expr& expr, std::span<const double> point, const ProfileBank& bank);

/// Step used by `fd_partial` when none is given: 1e-4 for first order, 2e-3
/// for second order, 5e-3 for third and fourth order.
double default_fd_step(int total_order);

/// Nested central-difference estimate of d^alpha expr. Each differentiation
/// level uses the half-step stencil (f(x+h/2) - f(x-h/2)) / h.
double fd_partial(const Expr& expr, std::span<const double> point, std::span<const int> alpha,
                  double step, const ProfileBank& bank);

/// Oracle used for AD cross-checks: `fd_partial` at the default step, with
/// one Richardson step (4 D(h/2) - D(h)) / 3 for |alpha| >= 2. Second
/// differences at a small step lose eps |f| / h^2 to cancellation, which is
/// 1e-6 for |f| ~ 50 at h = 1e-4; the larger extrapolated step avoids that.
double fd_oracle(const Expr& expr, std::span<const double> point, std::span<const int> alpha,
                 const ProfileBank& bank);

/// Infix grammar:
///   expr    := term (('+'|'-') term)*
///   term    := unary (('*'|'/') unary)*
///   unary   := ('-'|'+') unary | power
///   power   := primary ('^' unary)?          exponent must be constant
///   primary := number | name | name '(' expr ')' | '(' expr ')'
/// Names resolve to the given variables, the constant `pi`, the functions
/// sin cos sinh cosh exp sqrt, or one of `profile_names` (called with one
/// argument, e.g. `phi(s)`).
Expr parse_expression(std::string_view text, std::span<const std::string> variables,
                      std::span<const std::string> profile_names);

}  // namespace biconserve
