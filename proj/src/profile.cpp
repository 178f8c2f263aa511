#include "biconserve/profile.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "biconserve/errors.hpp"

namespace biconserve {

// ---------------------------------------------------------------------------
// ProfileBank

void ProfileBank::set(const std::string& name, ProfilePtr profile) {
  if (!profile) throw ContractViolation("null profile for '" + name + "'");
  entries_[name] = std::move(profile);
}

bool ProfileBank::contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

const Profile& ProfileBank::get(std::string_view name) const { return *shared(name); }

ProfilePtr ProfileBank::shared(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractViolation("no profile named '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> ProfileBank::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

// ---------------------------------------------------------------------------
// ExpressionProfile

ExpressionProfile::ExpressionProfile(Expr e, std::string source)
    : e_(std::move(e)), source_(source.empty() ? e_.to_string() : std::move(source)) {}

std::shared_ptr<const ExpressionProfile> ExpressionProfile::parse(std::string_view text) {
  static const std::vector<std::string> vars{"s"};
  return std::make_shared<const ExpressionProfile>(parse_expression(text, vars, {}), std::string(text));
}

std::vector<double> ExpressionProfile::derivatives(double s, int order) const {
  const double p[1] = {s};
  const Jet j = jet_eval(e_, p, order, empty_);
  std::vector<double> out(static_cast<std::size_t>(order) + 1);
  for (int k = 0; k <= order; ++k) {
    const int alpha[1] = {k};
    out[static_cast<std::size_t>(k)] = j.partial(alpha);
  }
  return out;
}

std::string ExpressionProfile::describe() const { return source_; }

// ---------------------------------------------------------------------------
// Constraint pairs

std::string to_string(PairKind k) {
  switch (k) {
    case PairKind::Sum1:
      return "sum1";
    case PairKind::DiffPlus:
      return "diffP";
    case PairKind::DiffMinus:
      return "diffM";
  }
  return "?";
}

PairKind pair_kind_from_string(std::string_view s) {
  if (s == "sum1") return PairKind::Sum1;
  if (s == "diffP") return PairKind::DiffPlus;
  if (s == "diffM") return PairKind::DiffMinus;
  throw ContractViolation("unknown profile pair kind '" + std::string(s) + "' (sum1, diffP, diffM)");
}

double pair_constraint_residual(PairKind kind, const Profile& phi, const Profile& psi, double s) {
  const double dp = phi.derivatives(s, 1)[1];
  const double dq = psi.derivatives(s, 1)[1];
  switch (kind) {
    case PairKind::Sum1:
      return std::abs(dp * dp + dq * dq - 1.0);
    case PairKind::DiffPlus:
      return std::abs(dp * dp - dq * dq - 1.0);
    case PairKind::DiffMinus:
      return std::abs(dp * dp - dq * dq + 1.0);
  }
  return 0.0;
}

IntegratedProfile::IntegratedProfile(Kernel kernel, Expr theta, double s0, double f0)
    : kernel_(kernel), theta_(std::move(theta)), s0_(s0), f0_(f0) {}

double IntegratedProfile::integrand(double x) const {
  const double p[1] = {x};
  const double th = evaluate(theta_, p, empty_);
  switch (kernel_) {
    case Kernel::Cos:
      return std::cos(th);
    case Kernel::Sin:
      return std::sin(th);
    case Kernel::Cosh:
      return std::cosh(th);
    case Kernel::Sinh:
      return std::sinh(th);
  }
  return 0.0;
}

std::vector<double> IntegratedProfile::derivatives(double s, int order) const {
  if (order < 0 || order > max_order()) throw ContractViolation("profile derivative order out of range");
  std::vector<double> out(static_cast<std::size_t>(order) + 1);
  if (s != s0_) {
    double err = 0.0;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [this](double x) { return integrand(x); }, s0_, s, 8, 1e-12, &err);
    out[0] = f0_ + integral;
  } else {
    out[0] = f0_;
  }
  if (order == 0) return out;

  const double p[1] = {s};
  const Jet th = jet_eval(theta_, p, order - 1, empty_);
  Jet g;
  switch (kernel_) {
    case Kernel::Cos:
      g = cos(th);
      break;
    case Kernel::Sin:
      g = sin(th);
      break;
    case Kernel::Cosh:
      g = cosh(th);
      break;
    case Kernel::Sinh:
      g = sinh(th);
      break;
  }
  for (int k = 1; k <= order; ++k) {
    const int alpha[1] = {k - 1};
    out[static_cast<std::size_t>(k)] = g.partial(alpha);
  }
  return out;
}

std::string IntegratedProfile::describe() const {
  static const char* names[] = {"cos", "sin", "cosh", "sinh"};
  std::ostringstream os;
  os.precision(17);
  os << f0_ << " + int_" << s0_ << "^s " << names[static_cast<int>(kernel_)] << "(" << theta_.to_string() << ")";
  return os.str();
}

ProfilePair make_profile_pair(PairKind kind, const Expr& theta, double s0, double phi0, double psi0) {
  using K = IntegratedProfile::Kernel;
  K kp = K::Cos, kq = K::Sin;
  if (kind == PairKind::DiffPlus) {
    kp = K::Cosh;
    kq = K::Sinh;
  } else if (kind == PairKind::DiffMinus) {
    kp = K::Sinh;
    kq = K::Cosh;
  }
  return {std::make_shared<const IntegratedProfile>(kp, theta, s0, phi0),
          std::make_shared<const IntegratedProfile>(kq, theta, s0, psi0)};
}

// ---------------------------------------------------------------------------
// PsiSolution

namespace {

double product(std::span<const double> offsets, double x) {
  double p = 1.0;
  for (double o : offsets) p *= x + o;
  return p;
}

// |P|^e where P has zeros; 0 at the zeros themselves.
double weight(std::span<const double> offsets, double e, double x) {
  const double p = std::abs(product(offsets, x));
  return p == 0.0 ? 0.0 : std::pow(p, e);
}

using GL16 = boost::math::quadrature::gauss<double, 16>;

double composite(const auto& f, double l, double r, int panels) {
  double acc = 0.0;
  const double h = (r - l) / panels;
  for (int i = 0; i < panels; ++i) acc += GL16::integrate(f, l + i * h, l + (i + 1) * h);
  return acc;
}

}  // namespace

PsiSolution::PsiSolution(std::vector<double> offsets, double c, Interval s_range, int n_nodes)
    : offsets_(std::move(offsets)), c_(c), range_(s_range) {
  if (offsets_.empty()) throw ContractViolation("psi needs at least one offset");
  if (n_nodes < 2) throw ContractViolation("psi needs at least two interpolation nodes");
  if (!(range_.lo < range_.hi)) throw ContractViolation("psi range must have lo < hi");
  exponent_ = 2.0 / 3.0;

  // Chebyshev points of the first kind, stored in increasing order.
  const double mid = range_.mid(), half = 0.5 * range_.width();
  for (int k = n_nodes - 1; k >= 0; --k) {
    const double th = (2.0 * k + 1.0) * std::numbers::pi / (2.0 * n_nodes);
    nodes_.push_back(mid + half * std::cos(th));
    weights_.push_back((k % 2 == 0 ? 1.0 : -1.0) * std::sin(th));
  }
  for (double s : nodes_) psi_.push_back(integrate_to(s));
  for (double s : nodes_) {
    const auto d = derivatives(s, 2);
    dpsi_.push_back(d[1]);
    d2psi_.push_back(d[2]);
  }
}

double PsiSolution::integrate_to(double s) const {
  const double e = exponent_;
  const int q = 3;  // denominator of the exponent
  const double lo = std::min(0.0, s), hi = std::max(0.0, s);

  std::vector<double> cuts{lo, hi};
  for (double o : offsets_)
    if (-o > lo && -o < hi) cuts.push_back(-o);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto is_zero = [&](double x) {
    return std::any_of(offsets_.begin(), offsets_.end(), [&](double o) { return x + o == 0.0; });
  };
  auto f = [&](double x) { return weight(offsets_, e, x); };

  // Piece [z, z + L] with an algebraic singularity at z: x = z + L w^q.
  auto singular_piece = [&](double z, double len) {
    auto g = [&](double w) {
      if (w <= 0.0) return 0.0;
      const double wq1 = std::pow(w, q - 1);
      return f(z + len * wq1 * w) * q * wq1;
    };
    return len * composite(g, 0.0, 1.0, 8);
  };

  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double l = cuts[i], r = cuts[i + 1];
    const bool zl = is_zero(l), zr = is_zero(r);
    if (!zl && !zr) {
      integral += composite(f, l, r, 8);
    } else {
      const double m = 0.5 * (l + r);
      integral += zl ? singular_piece(l, m - l) : composite(f, l, m, 4);
      integral += zr ? -singular_piece(r, m - r) : composite(f, m, r, 4);
    }
  }
  if (s < 0.0) integral = -integral;
  return 0.5 * s + c_ * integral;
}

double PsiSolution::interpolate(double s) const {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const double dx = s - nodes_[k];
    if (dx == 0.0) return psi_[k];
    const double w = weights_[k] / dx;
    num += w * psi_[k];
    den += w;
  }
  return num / den;
}

std::vector<double> PsiSolution::derivatives(double s, int order) const {
  if (order < 0 || order > max_order()) throw ContractViolation("psi derivative order out of range");
  std::vector<double> out(static_cast<std::size_t>(order) + 1);
  out[0] = (!psi_.empty() && range_.contains(s)) ? interpolate(s) : integrate_to(s);
  if (order == 0) return out;

  const double p0 = product(offsets_, s);
  if (p0 == 0.0) {
    if (order >= 2) throw DomainError("psi'' is singular at s = " + std::to_string(s));
    out[1] = 0.5;
    return out;
  }
  // Jet of |P|^e to order-1 gives psi' ... psi^(order).
  const Jet x = Jet::variable(1, order - 1, 0, s);
  Jet P = Jet::constant(1, order - 1, 1.0);
  for (double o : offsets_) P *= x + o;
  if (p0 < 0.0) P = -P;
  const Jet W = pow(P, exponent_);
  for (int k = 1; k <= order; ++k) {
    const int alpha[1] = {k - 1};
    out[static_cast<std::size_t>(k)] = c_ * W.partial(alpha) + (k == 1 ? 0.5 : 0.0);
  }
  return out;
}

std::string PsiSolution::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "s/2 + " << c_ << " * int_0^s |prod(x + o_i)|^" << exponent_ << " dx, o = (";
  for (std::size_t i = 0; i < offsets_.size(); ++i) os << (i ? ", " : "") << offsets_[i];
  os << ")";
  return os.str();
}

PsiPtr solve_psi_general(std::vector<double> offsets, double c, Interval s_range, int n_nodes) {
  if (c == 0.0) throw DomainError("psi requires a non-zero constant c");
  for (double o : offsets)
    if (s_range.contains(-o))
      throw DomainError("psi integrand vanishes at s = " + std::to_string(-o) + " inside the s-range [" +
                        std::to_string(s_range.lo) + ", " + std::to_string(s_range.hi) + "]");
  return std::make_shared<const PsiSolution>(std::move(offsets), c, s_range, n_nodes);
}

PsiPtr solve_psi(double a, double b, double c, Interval s_range, int n_nodes) {
  if (a == 0.0) throw DomainError("psi requires a != 0");
  const std::vector<double> offsets{0.0, 2.0 * a, 2.0 * b};
  for (double o : offsets)
    if (s_range.contains(-o) || product(offsets, s_range.mid()) <= 0.0)
      throw DomainError("s(s+2a)(s+2b) must be positive on the s-range [" + std::to_string(s_range.lo) + ", " +
                        std::to_string(s_range.hi) + "]");
  return solve_psi_general(offsets, c, s_range, n_nodes);
}

double psi_ode_residual_general(const Profile& psi, std::span<const double> offsets, double s) {
  double rhs = 0.0;
  for (double o : offsets) {
    if (std::abs(s + o) < 1e-8) throw DomainError("psi ODE pole at s = " + std::to_string(-o));
    rhs += 1.0 / (s + o);
  }
  const auto d = psi.derivatives(s, 2);
  const double den = 2.0 * d[1] - 1.0;
  if (std::abs(den) < 1e-12) throw DomainError("2 psi' - 1 vanishes at s = " + std::to_string(s));
  return std::abs(3.0 * d[2] / den - rhs);
}

double psi_ode_residual(const Profile& psi, double a, double b, double s) {
  const double offsets[3] = {0.0, 2.0 * a, 2.0 * b};
  return psi_ode_residual_general(psi, offsets, s);
}

}  // namespace biconserve
