#include "biconserve/jet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <unordered_map>

#include "biconserve/errors.hpp"

namespace biconserve {
namespace {

struct ProductTerm {
  std::uint32_t lhs;
  std::uint32_t rhs;
  std::uint32_t out;
};

struct ShiftTerm {
  std::uint32_t from;  // index of alpha + e_var
  double factor;       // alpha_var + 1
};

// Index bookkeeping for one variable count, up to kMaxJetOrder.
struct Layout {
  int nvars = 0;
  std::vector<std::vector<int>> indices;
  std::array<std::size_t, kMaxJetOrder + 2> count_upto{};  // #coeffs with |a| <= k
  std::unordered_map<std::uint64_t, std::size_t> lookup;
  std::vector<ProductTerm> products;  // sorted by |out|
  std::array<std::size_t, kMaxJetOrder + 1> products_upto{};
  std::vector<double> alpha_factorial;
  // shifts[var][i] for |multi_index(i)| < kMaxJetOrder
  std::vector<std::vector<ShiftTerm>> shifts;

  static std::uint64_t key(std::span<const int> a) {
    std::uint64_t k = 0;
    for (int e : a) k = k * (kMaxJetOrder + 1) + static_cast<std::uint64_t>(e);
    return k;
  }

  explicit Layout(int n) : nvars(n) {
    // graded lexicographic enumeration
    for (int total = 0; total <= kMaxJetOrder; ++total) {
      std::vector<int> a(n, 0);
      auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == n - 1) {
          a[pos] = left;
          indices.push_back(a);
          return;
        }
        for (int e = left; e >= 0; --e) {
          a[pos] = e;
          self(self, pos + 1, left - e);
        }
      };
      rec(rec, 0, total);
      count_upto[total] = indices.size();
    }
    count_upto[kMaxJetOrder + 1] = indices.size();
    for (std::size_t i = 0; i < indices.size(); ++i) lookup.emplace(key(indices[i]), i);

    alpha_factorial.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      double f = 1.0;
      for (int e : indices[i])
        for (int k = 2; k <= e; ++k) f *= k;
      alpha_factorial[i] = f;
    }

    std::vector<int> sum(n);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      for (std::size_t j = 0; j < indices.size(); ++j) {
        int total = 0;
        for (int v = 0; v < n; ++v) {
          sum[v] = indices[i][v] + indices[j][v];
          total += sum[v];
        }
        if (total > kMaxJetOrder) continue;
        products.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                            static_cast<std::uint32_t>(lookup.at(key(sum)))});
      }
    }
    std::stable_sort(products.begin(), products.end(),
                     [](const ProductTerm& x, const ProductTerm& y) { return x.out < y.out; });
    for (int k = 0; k <= kMaxJetOrder; ++k) {
      const auto limit = count_upto[k];
      products_upto[k] = static_cast<std::size_t>(
          std::partition_point(products.begin(), products.end(),
                               [&](const ProductTerm& t) { return t.out < limit; }) -
          products.begin());
    }

    shifts.assign(n, {});
    for (int v = 0; v < n; ++v) {
      for (std::size_t i = 0; i < count_upto[kMaxJetOrder - 1]; ++i) {
        auto a = indices[i];
        const double factor = a[v] + 1;
        a[v] += 1;
        shifts[v].push_back({static_cast<std::uint32_t>(lookup.at(key(a))), factor});
      }
    }
  }
};

const Layout& layout(int nvars) {
  static const auto table = [] {
    std::array<std::unique_ptr<Layout>, kMaxJetVars + 1> t;
    for (int n = 1; n <= kMaxJetVars; ++n) t[n] = std::make_unique<Layout>(n);
    return t;
  }();
  if (nvars < 1 || nvars > kMaxJetVars)
    throw ContractViolation("jet variable count out of range: " + std::to_string(nvars));
  return *table[nvars];
}

void check_order(int order) {
  if (order < 0 || order > kMaxJetOrder)
    throw ContractViolation("jet order out of range: " + std::to_string(order));
}

void check_compatible(const Jet& a, const Jet& b) {
  if (a.nvars() != b.nvars())
    throw ContractViolation("jets over different variable counts combined");
}

}  // namespace

Jet::Jet(int nvars, int order) : nvars_(nvars), order_(order) {
  check_order(order);
  coeffs_.assign(layout(nvars).count_upto[order], 0.0);
}

Jet Jet::constant(int nvars, int order, double value) {
  Jet j(nvars, order);
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::variable(int nvars, int order, int var, double at) {
  if (var < 0 || var >= nvars) throw ContractViolation("jet variable index out of range");
  Jet j(nvars, order);
  j.coeffs_[0] = at;
  if (order >= 1) j.coeffs_[1 + static_cast<std::size_t>(var)] = 1.0;
  return j;
}

std::size_t Jet::coefficient_count(int nvars, int order) {
  check_order(order);
  return layout(nvars).count_upto[order];
}

std::size_t Jet::index_of(int nvars, std::span<const int> alpha) {
  const auto& L = layout(nvars);
  if (static_cast<int>(alpha.size()) != nvars) throw ContractViolation("multi-index length mismatch");
  int total = 0;
  for (int e : alpha) {
    if (e < 0) throw ContractViolation("negative multi-index entry");
    total += e;
  }
  if (total > kMaxJetOrder) throw ContractViolation("multi-index exceeds maximum jet order");
  return L.lookup.at(Layout::key(alpha));
}

std::vector<int> Jet::multi_index(int nvars, std::size_t index) { return layout(nvars).indices.at(index); }

double Jet::partial(std::span<const int> alpha) const {
  const auto i = index_of(nvars_, alpha);
  if (i >= coeffs_.size()) throw ContractViolation("requested partial exceeds jet order");
  return coeffs_[i] * layout(nvars_).alpha_factorial[i];
}

Jet Jet::derivative(int var) const {
  if (order_ == 0) throw ContractViolation("cannot differentiate an order-0 jet");
  if (var < 0 || var >= nvars_) throw ContractViolation("jet variable index out of range");
  const auto& L = layout(nvars_);
  Jet d(nvars_, order_ - 1);
  const auto& sh = L.shifts[var];
  for (std::size_t i = 0; i < d.coeffs_.size(); ++i) d.coeffs_[i] = sh[i].factor * coeffs_[sh[i].from];
  return d;
}

Jet Jet::truncated(int order) const {
  if (order > order_) throw ContractViolation("cannot raise jet order by truncation");
  Jet t(nvars_, order);
  std::copy_n(coeffs_.begin(), t.coeffs_.size(), t.coeffs_.begin());
  return t;
}

Jet& Jet::operator+=(const Jet& o) {
  check_compatible(*this, o);
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_compatible(*this, o);
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

Jet& Jet::operator+=(double c) {
  coeffs_[0] += c;
  return *this;
}

Jet& Jet::operator-=(double c) {
  coeffs_[0] -= c;
  return *this;
}

Jet& Jet::operator*=(double c) {
  for (auto& x : coeffs_) x *= c;
  return *this;
}

Jet& Jet::operator/=(double c) {
  for (auto& x : coeffs_) x /= c;
  return *this;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& x : r.coeffs_) x = -x;
  return r;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator*(const Jet& a, const Jet& b) {
  check_compatible(a, b);
  const int order = std::min(a.order(), b.order());
  const auto& L = layout(a.nvars());
  Jet r(a.nvars(), order);
  const auto ca = a.coefficients();
  const auto cb = b.coefficients();
  const auto n = L.products_upto[order];
  for (std::size_t k = 0; k < n; ++k) {
    const auto& t = L.products[k];
    r.coefficient(t.out) += ca[t.lhs] * cb[t.rhs];
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator+(Jet a, double c) { return a += c; }
Jet operator+(double c, Jet a) { return a += c; }
Jet operator-(Jet a, double c) { return a -= c; }
Jet operator-(double c, const Jet& a) { return (-a) += c; }
Jet operator*(Jet a, double c) { return a *= c; }
Jet operator*(double c, Jet a) { return a *= c; }
Jet operator/(Jet a, double c) { return a /= c; }
Jet operator/(double c, const Jet& a) { return reciprocal(a) *= c; }

Jet compose(const Jet& g, std::span<const double> derivs) {
  const int order = g.order();
  if (static_cast<int>(derivs.size()) < order + 1)
    throw ContractViolation("composition needs derivatives up to the jet order");
  Jet h = g;
  h.coefficient(0) = 0.0;  // nilpotent part
  Jet result = Jet::constant(g.nvars(), order, derivs[0]);
  Jet power = Jet::constant(g.nvars(), order, 1.0);
  double factorial = 1.0;
  for (int k = 1; k <= order; ++k) {
    power = power * h;
    factorial *= k;
    const double c = derivs[k] / factorial;
    const auto pc = power.coefficients();
    for (std::size_t i = 0; i < pc.size(); ++i) result.coefficient(i) += c * pc[i];
  }
  return result;
}

Jet reciprocal(const Jet& g) {
  const double x = g.value();
  if (x == 0.0) throw DomainError("reciprocal of a jet with zero value");
  std::array<double, kMaxJetOrder + 1> d{};
  double p = 1.0 / x;
  for (int k = 0; k <= g.order(); ++k) {
    d[k] = p;
    p *= -(k + 1) / x;
  }
  return compose(g, std::span<const double>(d.data(), g.order() + 1));
}

Jet sin(const Jet& g) {
  const double s = std::sin(g.value()), c = std::cos(g.value());
  const std::array<double, 5> d{s, c, -s, -c, s};
  return compose(g, std::span<const double>(d.data(), g.order() + 1));
}

Jet cos(const Jet& g) {
  const double s = std::sin(g.value()), c = std::cos(g.value());
  const std::array<double, 5> d{c, -s, -c, s, c};
  return compose(g, std::span<const double>(d.data(), g.order() + 1));
}

Jet sinh(const Jet& g) {
  const double s = std::sinh(g.value()), c = std::cosh(g.value());
  const std::array<double, 5> d{s, c, s, c, s};
  return compose(g, std::span<const double>(d.data(), g.order() + 1));
}

Jet cosh(const Jet& g) {
  const double s = std::sinh(g.value()), c = std::cosh(g.value());
  const std::array<double, 5> d{c, s, c, s, c};
  return compose(g, std::span<const double>(d.data(), g.order() + 1));
}

Jet exp(const Jet& g) {
  const double e = std::exp(g.value());
  const std::array<double, 5> d{e, e, e, e, e};
  return compose(g, std::span<const double>(d.data(), g.order() + 1));
}

Jet sqrt(const Jet& g) { return pow(g, 0.5); }

Jet pow(const Jet& g, double exponent) {
  const double x = g.value();
  const bool integral = exponent == std::floor(exponent);
  if (!integral && x <= 0.0) throw DomainError("fractional power of a non-positive value");
  if (integral && exponent < 0 && x == 0.0) throw DomainError("negative power of zero");
  std::array<double, kMaxJetOrder + 1> d{};
  double coef = 1.0;
  for (int k = 0; k <= g.order(); ++k) {
    d[k] = coef == 0.0 ? 0.0 : coef * std::pow(x, exponent - k);
    coef *= exponent - k;
  }
  return compose(g, std::span<const double>(d.data(), g.order() + 1));
}

}  // namespace biconserve
