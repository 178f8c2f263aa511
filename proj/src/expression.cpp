#include "biconserve/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "biconserve/errors.hpp"
#include "biconserve/profile.hpp"

namespace biconserve {
namespace {

std::shared_ptr<Expr::Node> make_node(ExprOp op) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  return n;
}

const char* function_name(ExprOp op) {
  switch (op) {
    case ExprOp::Sin:
      return "sin";
    case ExprOp::Cos:
      return "cos";
    case ExprOp::Sinh:
      return "sinh";
    case ExprOp::Cosh:
      return "cosh";
    case ExprOp::Exp:
      return "exp";
    case ExprOp::Sqrt:
      return "sqrt";
    default:
      return nullptr;
  }
}

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

struct DoubleContext {
  std::span<const double> point;
  const ProfileBank& bank;

  double constant(double c) const { return c; }
  double variable(int i) const { return point[static_cast<std::size_t>(i)]; }
  double profile(const std::string& name, const double& arg) const { return bank.get(name).value(arg); }
};

struct JetContext {
  std::span<const double> point;
  int order;
  const ProfileBank& bank;

  int nvars() const { return static_cast<int>(point.size()); }
  Jet constant(double c) const { return Jet::constant(nvars(), order, c); }
  Jet variable(int i) const { return Jet::variable(nvars(), order, i, point[static_cast<std::size_t>(i)]); }
  Jet profile(const std::string& name, const Jet& arg) const {
    const auto& p = bank.get(name);
    if (arg.order() > p.max_order())
      throw ContractViolation("profile '" + name + "' supplies derivatives only to order " +
                              std::to_string(p.max_order()));
    const auto d = p.derivatives(arg.value(), arg.order());
    return compose(arg, d);
  }
};

double guard_value(double x) { return x; }
double guard_value(const Jet& x) { return x.value(); }

template <class T, class Ctx>
T eval(const Expr& e, const Ctx& ctx) {
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::sin;
  using std::sinh;
  const auto& n = e.node();
  switch (n.op) {
    case ExprOp::Constant:
      return ctx.constant(n.constant);
    case ExprOp::Variable:
      if (n.variable < 0 || n.variable >= static_cast<int>(ctx.point.size()))
        throw ContractViolation("expression variable '" + n.name + "' outside the evaluation point");
      return ctx.variable(n.variable);
    case ExprOp::Profile:
      return ctx.profile(n.name, eval<T>(n.args[0], ctx));
    case ExprOp::Add:
      return eval<T>(n.args[0], ctx) + eval<T>(n.args[1], ctx);
    case ExprOp::Sub:
      return eval<T>(n.args[0], ctx) - eval<T>(n.args[1], ctx);
    case ExprOp::Mul:
      return eval<T>(n.args[0], ctx) * eval<T>(n.args[1], ctx);
    case ExprOp::Div: {
      T den = eval<T>(n.args[1], ctx);
      if (std::abs(guard_value(den)) < kDivisionGuard)
        throw DomainError("division by a value near zero in " + e.to_string());
      return eval<T>(n.args[0], ctx) / den;
    }
    case ExprOp::Neg:
      return -eval<T>(n.args[0], ctx);
    case ExprOp::Pow: {
      T base = eval<T>(n.args[0], ctx);
      const double b = guard_value(base);
      const double k = n.constant;
      if (k != std::floor(k) && b <= 0.0)
        throw DomainError("fractional power of non-positive base " + format_number(b) + " in " + e.to_string());
      if (k < 0 && std::abs(b) < kDivisionGuard)
        throw DomainError("negative power of a value near zero in " + e.to_string());
      if constexpr (std::is_same_v<T, double>)
        return std::pow(base, k);
      else
        return pow(base, k);
    }
    case ExprOp::Sin:
      return sin(eval<T>(n.args[0], ctx));
    case ExprOp::Cos:
      return cos(eval<T>(n.args[0], ctx));
    case ExprOp::Sinh:
      return sinh(eval<T>(n.args[0], ctx));
    case ExprOp::Cosh:
      return cosh(eval<T>(n.args[0], ctx));
    case ExprOp::Exp:
      return exp(eval<T>(n.args[0], ctx));
    case ExprOp::Sqrt: {
      T base = eval<T>(n.args[0], ctx);
      if (guard_value(base) <= 0.0)
        throw DomainError("square root of non-positive value in " + e.to_string());
      if constexpr (std::is_same_v<T, double>)
        return std::sqrt(base);
      else
        return sqrt(base);
    }
  }
  throw ContractViolation("unknown expression node");
}

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> vars, std::span<const std::string> profiles)
      : text_(text), vars_(vars), profiles_(profiles) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ContractViolation("expression parse error at column " + std::to_string(pos_ + 1) + " of \"" +
                            std::string(text_) + "\": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  // Constant operands fold so that exponents like (2/3) stay literal.
  static Expr fold(ExprOp op, const Expr& a, const Expr& b) {
    if (a.is_constant() && b.is_constant()) {
      const double x = a.node().constant, y = b.node().constant;
      switch (op) {
        case ExprOp::Add:
          return Expr(x + y);
        case ExprOp::Sub:
          return Expr(x - y);
        case ExprOp::Mul:
          return Expr(x * y);
        default:
          if (y != 0.0) return Expr(x / y);
      }
    }
    return Expr::binary(op, a, b);
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+'))
        lhs = fold(ExprOp::Add, lhs, parse_product());
      else if (accept('-'))
        lhs = fold(ExprOp::Sub, lhs, parse_product());
      else
        return lhs;
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = fold(ExprOp::Mul, lhs, parse_unary());
      else if (accept('/'))
        lhs = fold(ExprOp::Div, lhs, parse_unary());
      else
        return lhs;
    }
  }

  Expr parse_unary() {
    if (accept('-')) {
      Expr inner = parse_unary();
      if (inner.is_constant()) return Expr(-inner.node().constant);
      return -inner;
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) {
      Expr exponent = parse_unary();
      if (!exponent.is_constant()) fail("exponent must be a constant");
      return pow(base, exponent.node().constant);
    }
    return base;
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (accept('(')) {
      Expr e = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return Expr(v);
  }

  Expr parse_name() {
    const auto start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    skip_space();
    const bool call = pos_ < text_.size() && text_[pos_] == '(';
    if (!call) {
      for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == name) return Expr::variable(static_cast<int>(i), name);
      if (name == "pi") return Expr(std::numbers::pi);
      fail("unknown name '" + name + "'");
    }
    accept('(');
    Expr arg = parse_sum();
    if (!accept(')')) fail("expected ')' after argument of " + name);
    static const std::pair<const char*, ExprOp> functions[] = {
        {"sin", ExprOp::Sin},   {"cos", ExprOp::Cos}, {"sinh", ExprOp::Sinh},
        {"cosh", ExprOp::Cosh}, {"exp", ExprOp::Exp}, {"sqrt", ExprOp::Sqrt},
    };
    for (const auto& [fname, op] : functions)
      if (name == fname) return Expr::unary(op, arg);
    for (const auto& p : profiles_)
      if (p == name) return Expr::profile(name, arg);
    fail("unknown function '" + name + "'");
  }

  std::string_view text_;
  std::span<const std::string> vars_;
  std::span<const std::string> profiles_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr::Expr(double c) {
  auto n = make_node(ExprOp::Constant);
  n->constant = c;
  n_ = std::move(n);
}

Expr Expr::variable(int index, std::string name) {
  auto n = make_node(ExprOp::Variable);
  n->variable = index;
  n->name = std::move(name);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::profile(std::string name, Expr argument) {
  auto n = make_node(ExprOp::Profile);
  n->name = std::move(name);
  n->args.push_back(std::move(argument));
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::unary(ExprOp op, Expr a) {
  auto n = make_node(op);
  n->args.push_back(std::move(a));
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::binary(ExprOp op, Expr a, Expr b) {
  auto n = make_node(op);
  n->args.push_back(std::move(a));
  n->args.push_back(std::move(b));
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

std::string Expr::to_string() const {
  const auto& n = *n_;
  auto wrap = [](const Expr& e) {
    const auto op = e.op();
    if (op == ExprOp::Constant || op == ExprOp::Variable || op == ExprOp::Profile || function_name(op))
      return e.to_string();
    return "(" + e.to_string() + ")";
  };
  switch (n.op) {
    case ExprOp::Constant:
      return n.constant < 0 ? "(" + format_number(n.constant) + ")" : format_number(n.constant);
    case ExprOp::Variable:
      return n.name;
    case ExprOp::Profile:
      return n.name + "(" + n.args[0].to_string() + ")";
    case ExprOp::Add:
      return n.args[0].to_string() + " + " + wrap(n.args[1]);
    case ExprOp::Sub:
      return n.args[0].to_string() + " - " + wrap(n.args[1]);
    case ExprOp::Mul:
      return wrap(n.args[0]) + "*" + wrap(n.args[1]);
    case ExprOp::Div:
      return wrap(n.args[0]) + "/" + wrap(n.args[1]);
    case ExprOp::Neg:
      return "-" + wrap(n.args[0]);
    case ExprOp::Pow:
      return wrap(n.args[0]) + "^" + (n.constant < 0 ? "(" + format_number(n.constant) + ")" : format_number(n.constant));
    default:
      return std::string(function_name(n.op)) + "(" + n.args[0].to_string() + ")";
  }
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(ExprOp::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(ExprOp::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(ExprOp::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(ExprOp::Div, a, b); }
Expr operator-(const Expr& a) { return Expr::unary(ExprOp::Neg, a); }

Expr pow(const Expr& a, double exponent) {
  auto n = make_node(ExprOp::Pow);
  n->constant = exponent;
  n->args.push_back(a);
  return Expr(std::shared_ptr<const Expr::Node>(std::move(n)));
}

Expr sin(const Expr& a) { return Expr::unary(ExprOp::Sin, a); }
Expr cos(const Expr& a) { return Expr::unary(ExprOp::Cos, a); }
Expr sinh(const Expr& a) { return Expr::unary(ExprOp::Sinh, a); }
Expr cosh(const Expr& a) { return Expr::unary(ExprOp::Cosh, a); }
Expr exp(const Expr& a) { return Expr::unary(ExprOp::Exp, a); }
Expr sqrt(const Expr& a) { return Expr::unary(ExprOp::Sqrt, a); }

Jet jet_eval(const Expr& expr, std::span<const double> point, int order, const ProfileBank& bank) {
  if (order < 0 || order > kMaxJetOrder) throw ContractViolation("jet order out of range");
  return eval<Jet>(expr, JetContext{point, order, bank});
}

double evaluate(const Expr& expr, std::span<const double> point, const ProfileBank& bank) {
  return eval<double>(expr, DoubleContext{point, bank});
}

double default_fd_step(int total_order) {
  if (total_order <= 1) return 1e-4;
  return total_order == 2 ? 2e-3 : 5e-3;
}

double fd_partial(const Expr& expr, std::span<const double> point, std::span<const int> alpha, double step,
                  const ProfileBank& bank) {
  if (!(step > 0.0)) throw ContractViolation("finite-difference step must be positive");
  if (alpha.size() != point.size()) throw ContractViolation("multi-index length mismatch");
  std::vector<double> x(point.begin(), point.end());
  std::vector<int> a(alpha.begin(), alpha.end());
  auto rec = [&](auto&& self) -> double {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0) continue;
      --a[i];
      const double x0 = x[i];
      x[i] = x0 + 0.5 * step;
      const double fp = self(self);
      x[i] = x0 - 0.5 * step;
      const double fm = self(self);
      x[i] = x0;
      ++a[i];
      return (fp - fm) / step;
    }
    return evaluate(expr, x, bank);
  };
  return rec(rec);
}

double fd_oracle(const Expr& expr, std::span<const double> point, std::span<const int> alpha,
                 const ProfileBank& bank) {
  int total = 0;
  for (int a : alpha) total += a;
  const double h = default_fd_step(total);
  if (total < 2) return fd_partial(expr, point, alpha, h, bank);
  return (4.0 * fd_partial(expr, point, alpha, 0.5 * h, bank) - fd_partial(expr, point, alpha, h, bank)) / 3.0;
}

Expr parse_expression(std::string_view text, std::span<const std::string> variables,
                      std::span<const std::string> profile_names) {
  return Parser(text, variables, profile_names).parse();
}

}  // namespace biconserve
