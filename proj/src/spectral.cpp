#include "biconserve/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include "biconserve/errors.hpp"

namespace biconserve {

namespace {

using cd = std::complex<double>;

double horner(const std::vector<double>& c, double x, double* deriv) {
  double p = 0.0, dp = 0.0;
  for (double ci : c) {
    dp = dp * x + p;
    p = p * x + ci;
  }
  if (deriv) *deriv = dp;
  return p;
}

// Merge radius for a cluster of m eigenvalues. A Jordan block of size m
// spreads its computed eigenvalues by roughly eps^(1/m).
double radius(int m, double tol, double scale) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  return (1.0 + scale) * std::max(tol, 4.0 * std::pow(64.0 * eps, 1.0 / m));
}

struct Cluster {
  std::vector<int> members;
};

double diameter(const std::vector<cd>& z, const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> all(a);
  all.insert(all.end(), b.begin(), b.end());
  double d = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) d = std::max(d, std::abs(z[all[i]] - z[all[j]]));
  return d;
}

cd mean_of(const std::vector<cd>& z, const std::vector<int>& m) {
  cd s = 0.0;
  for (int i : m) s += z[i];
  return s / static_cast<double>(m.size());
}

}  // namespace

std::string to_string(ShapeCase c) {
  switch (c) {
    case ShapeCase::I: return "I";
    case ShapeCase::II: return "II";
    case ShapeCase::III: return "III";
    case ShapeCase::IV: return "IV";
    case ShapeCase::Unresolved: return "unresolved";
  }
  return "unresolved";
}

double ShapeSpectrum::trace() const {
  double t = 0.0;
  for (const auto& e : real_eigenvalues) t += e.algebraic * e.value;
  for (const auto& c : complex_pairs) t += 2.0 * c.re;
  return t;
}

std::vector<double> ShapeSpectrum::expanded() const {
  std::vector<double> out;
  for (const auto& e : real_eigenvalues) out.insert(out.end(), static_cast<std::size_t>(e.algebraic), e.value);
  return out;
}

std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& S) {
  if (S.rows() != S.cols()) throw ContractViolation("characteristic_polynomial: matrix is not square");
  const int n = static_cast<int>(S.rows());
  std::vector<double> p(n + 1, 0.0);  // power sums p[k] = tr(S^k)
  Eigen::MatrixXd Sk = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    Sk = Sk * S;
    p[k] = Sk.trace();
  }
  std::vector<double> e(n + 1, 0.0);  // elementary symmetric polynomials
  e[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    double acc = 0.0;
    for (int i = 1; i <= k; ++i) acc += ((i % 2) ? 1.0 : -1.0) * e[k - i] * p[i];
    e[k] = acc / k;
  }
  std::vector<double> c(n + 1);
  for (int k = 0; k <= n; ++k) c[k] = ((k % 2) ? -1.0 : 1.0) * e[k];
  return c;
}

std::array<double, 5> characteristic_quartic(const Eigen::Matrix4d& S) {
  const auto c = characteristic_polynomial(S);
  return {c[0], c[1], c[2], c[3], c[4]};
}

ShapeSpectrum eigen_structure(const Eigen::MatrixXd& S, const Eigen::MatrixXd& G, double tol) {
  const int n = static_cast<int>(S.rows());
  if (S.cols() != n || G.rows() != n || G.cols() != n || n == 0)
    throw ContractViolation("eigen_structure: S and G must be square of the same size");
  const double gmax = G.cwiseAbs().maxCoeff();
  const double smax = S.cwiseAbs().maxCoeff();
  const Eigen::MatrixXd GS = G * S;
  const double asym = (GS - GS.transpose()).cwiseAbs().maxCoeff();
  if (!(asym < tol * std::max(1.0, gmax * smax)))
    throw ContractViolation("eigen_structure: S is not self-adjoint for G (|GS - (GS)^T| = " + std::to_string(asym) + ")");
  if (std::abs(G.determinant()) <= 1e-14 * std::pow(1.0 + gmax, n))
    throw ContractViolation("eigen_structure: metric is singular");

  Eigen::EigenSolver<Eigen::MatrixXd> es(S, false);
  if (es.info() != Eigen::Success) throw ContractViolation("eigen_structure: eigenvalue iteration failed");
  std::vector<cd> z(n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i) {
    z[i] = es.eigenvalues()[i];
    scale = std::max(scale, std::abs(z[i]));
  }

  ShapeSpectrum out;
  out.n = n;
  out.clustering_tol = radius(1, tol, scale);

  // Partition by taking, among unassigned eigenvalues, the largest subset
  // whose diameter fits the radius for its size (smallest diameter on ties).
  // Pairwise agglomeration would miss a Jordan triple whose conjugate pair
  // alone is too wide for the size-2 radius.
  if (n > 12) throw ContractViolation("eigen_structure: dimension too large");
  std::vector<Cluster> cl;
  unsigned free_mask = (1u << n) - 1u;
  while (free_mask) {
    unsigned best_mask = 0;
    int best_size = 0;
    double best_d = 0.0;
    for (unsigned sub = free_mask; sub; sub = (sub - 1) & free_mask) {
      const int m = std::popcount(sub);
      if (m < best_size) continue;
      std::vector<int> mem;
      for (int i = 0; i < n; ++i)
        if (sub >> i & 1u) mem.push_back(i);
      const double d = diameter(z, mem, {});
      if (d > radius(m, tol, scale)) continue;
      if (m > best_size || d < best_d) {
        best_mask = sub;
        best_size = m;
        best_d = d;
      }
    }
    Cluster c;
    for (int i = 0; i < n; ++i)
      if (best_mask >> i & 1u) c.members.push_back(i);
    cl.push_back(std::move(c));
    free_mask &= ~best_mask;
  }

  bool ambiguous = false;
  for (std::size_t i = 0; i < cl.size() && !ambiguous; ++i)
    for (std::size_t j = i + 1; j < cl.size(); ++j) {
      const int m = static_cast<int>(cl[i].members.size() + cl[j].members.size());
      if (diameter(z, cl[i].members, cl[j].members) <= 10.0 * radius(m, tol, scale)) {
        ambiguous = true;
        break;
      }
    }

  const auto poly = characteristic_polynomial(S);
  int unmatched_complex = 0;
  for (const auto& c : cl) {
    const int m = static_cast<int>(c.members.size());
    const cd mu = mean_of(z, c.members);
    if (std::abs(mu.imag()) <= radius(m, tol, scale)) {
      double x = mu.real();
      if (m == 1) {
        for (int step = 0; step < 2; ++step) {
          double dp = 0.0;
          const double px = horner(poly, x, &dp);
          if (dp == 0.0) break;
          const double xn = x - px / dp;
          if (std::abs(horner(poly, xn, nullptr)) < std::abs(px)) x = xn;
          else break;
        }
      }
      const Eigen::MatrixXd A = S - x * Eigen::MatrixXd::Identity(n, n);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
      const double thr = radius(m, tol, scale);
      int null = 0;
      for (int k = 0; k < n; ++k) null += svd.singularValues()[k] <= thr;
      if (null > m || null == 0) ambiguous = true;
      out.real_eigenvalues.push_back({x, m, std::clamp(null, 1, m)});
    } else if (mu.imag() > 0) {
      if (m != 1) ambiguous = true;  // repeated complex pairs cannot occur for n <= 5 with index 2
      out.complex_pairs.push_back({mu.real(), mu.imag()});
      ++unmatched_complex;
    } else {
      --unmatched_complex;
    }
  }
  if (unmatched_complex != 0) ambiguous = true;
  std::sort(out.real_eigenvalues.begin(), out.real_eigenvalues.end(),
            [](const RealEigenvalue& a, const RealEigenvalue& b) { return a.value < b.value; });

  if (ambiguous) {
    out.case_label = ShapeCase::Unresolved;
    out.note = "eigenvalue separation inside the ambiguity band";
  } else {
    out.case_label = classify_case(out).label;
    if (out.case_label == ShapeCase::Unresolved) out.note = "multiplicity pattern matches no canonical form";
  }
  return out;
}

std::string multiplicity_pattern(const ShapeSpectrum& spec) {
  std::vector<int> mult;
  for (const auto& e : spec.real_eigenvalues) mult.push_back(e.algebraic);
  std::sort(mult.begin(), mult.end(), std::greater<>());
  std::string s;
  auto one = std::find(mult.begin(), mult.end(), 1);
  if (one != mult.end()) {
    mult.erase(one);
    s = "1";
  }
  for (int m : mult) s += (s.empty() ? "" : "+") + std::to_string(m);
  for (std::size_t i = 0; i < spec.complex_pairs.size(); ++i) s += (s.empty() ? "" : "+") + std::string("2c");
  return s;
}

Classification classify_case(const ShapeSpectrum& spec) {
  Classification c;
  c.pattern = multiplicity_pattern(spec);
  if (!spec.note.empty() && spec.case_label == ShapeCase::Unresolved) return c;
  int defect1 = 0, defect2_triple = 0, other = 0;
  for (const auto& e : spec.real_eigenvalues) {
    const int d = e.algebraic - e.geometric;
    if (d == 0) continue;
    if (d == 1) ++defect1;
    else if (d == 2 && e.algebraic == 3) ++defect2_triple;
    else ++other;
  }
  const int defective = defect1 + defect2_triple + other;
  if (spec.complex_pairs.empty()) {
    if (defective == 0) c.label = ShapeCase::I;
    else if (defect1 == 1 && defective == 1) c.label = ShapeCase::II;
    else if (defect2_triple == 1 && defective == 1) c.label = ShapeCase::IV;
  } else if (spec.complex_pairs.size() == 1 && defective == 0) {
    c.label = ShapeCase::III;
  }
  return c;
}

}  // namespace biconserve
