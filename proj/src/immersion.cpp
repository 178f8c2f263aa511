#include "biconserve/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "biconserve/errors.hpp"

namespace biconserve {
namespace {

std::string format_point(std::span<const double> p) {
  std::ostringstream os;
  os.precision(10);
  os << "(";
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

double euclid(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot_euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Gauss-Jordan inverse with pivots chosen on values; works for Jet and double.
template <class T>
std::vector<T> invert(std::vector<T> a, int n) {
  std::vector<T> inv(a.size(), a[0] * 0.0);
  for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i * n + i)] += 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(value_of(a[r * n + col])) > std::abs(value_of(a[pivot * n + col]))) pivot = r;
    if (value_of(a[pivot * n + col]) == 0.0) throw DegenerateMetric("singular induced metric");
    if (pivot != col)
      for (int c = 0; c < n; ++c) {
        std::swap(a[col * n + c], a[pivot * n + c]);
        std::swap(inv[col * n + c], inv[pivot * n + c]);
      }
    const T p = a[col * n + col];
    for (int c = 0; c < n; ++c) {
      a[col * n + c] = a[col * n + c] / p;
      inv[col * n + c] = inv[col * n + c] / p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const T f = a[r * n + col];
      for (int c = 0; c < n; ++c) {
        a[r * n + c] -= f * a[col * n + c];
        inv[r * n + c] -= f * inv[col * n + c];
      }
    }
  }
  return inv;
}

std::vector<int> alpha_of(int d, int i, int j = -1) {
  std::vector<int> a(static_cast<std::size_t>(d), 0);
  ++a[static_cast<std::size_t>(i)];
  if (j >= 0) ++a[static_cast<std::size_t>(j)];
  return a;
}

// Everything the identity checks and packets need, as jets in the chart
// parameters around p.
struct JetGeometry {
  int d = 0, m = 0;
  std::vector<std::vector<Jet>> T;   // d x m, order 2
  std::vector<std::vector<Jet>> Hs;  // d*d x m, order 1
  std::vector<Jet> G;                // d*d, order 2
  std::vector<Jet> Ginv;             // d*d, order 1
  std::vector<Jet> Gamma;            // d^3 indexed (k, i, j), order 1
  Eigen::MatrixXd Gv, Ginv_v;
  int index = 0;
};

JetGeometry jet_geometry(const ImmersionChart& chart, std::span<const double> p, const Tolerances& tol,
                         bool christoffel) {
  chart.validate();
  JetGeometry g;
  g.d = chart.dim();
  g.m = static_cast<int>(chart.components.size());
  const int d = g.d, m = g.m;
  const int order = christoffel ? 3 : 2;
  std::vector<Jet> x;
  x.reserve(static_cast<std::size_t>(m));
  for (const auto& c : chart.components) x.push_back(jet_eval(c, p, order, chart.bank));

  g.T.assign(static_cast<std::size_t>(d), {});
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < m; ++a) g.T[i].push_back(x[a].derivative(i));
  g.Hs.assign(static_cast<std::size_t>(d * d), {});
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int a = 0; a < m; ++a) g.Hs[i * d + j].push_back(g.T[i][a].derivative(j));

  g.G.reserve(static_cast<std::size_t>(d * d));
  g.Gv.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      g.G.push_back(i <= j ? inner<Jet>(g.T[i], g.T[j], chart.signature) : g.G[j * d + i]);
      g.Gv(i, j) = g.G.back().value();
    }
  g.index = check_metric(g.Gv, chart.expected_index, p, tol);

  const int low = order - 2;
  std::vector<Jet> Gl;
  for (const auto& e : g.G) Gl.push_back(e.truncated(low));
  g.Ginv = invert(Gl, d);
  g.Ginv_v.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g.Ginv_v(i, j) = g.Ginv[i * d + j].value();

  if (christoffel) {
    // dG[(l*d + i)*d + j] = d_l G_ij, order 1
    std::vector<Jet> dG;
    dG.reserve(static_cast<std::size_t>(d * d * d));
    for (int l = 0; l < d; ++l)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) dG.push_back(g.G[i * d + j].derivative(l));
    auto dg = [&](int l, int i, int j) -> const Jet& { return dG[(l * d + i) * d + j]; };
    g.Gamma.reserve(static_cast<std::size_t>(d * d * d));
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          Jet acc = Jet::constant(d, 1, 0.0);
          for (int l = 0; l < d; ++l) acc += g.Ginv[k * d + l] * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
          g.Gamma.push_back(acc * 0.5);
        }
  }
  return g;
}

// Last component with |w_k| above a relative floor decides the base sign.
double last_nonzero_sign(std::span<const double> w) {
  double mx = 0.0;
  for (double x : w) mx = std::max(mx, std::abs(x));
  for (std::size_t k = w.size(); k-- > 0;)
    if (std::abs(w[k]) > 1e-12 * mx) return w[k] > 0 ? 1.0 : -1.0;
  return 1.0;
}

// Raw metric cross product of double tangents with the rank and causal checks.
std::vector<double> checked_cross(const std::vector<std::vector<double>>& tangents, const Signature& sig,
                                  std::span<const double> p, const Tolerances& tol) {
  std::vector<double> w = metric_cross<double>(tangents, sig);
  double scale = 1.0;
  for (const auto& t : tangents) scale *= euclid(t);
  double mx = 0.0;
  for (double x : w) mx = std::max(mx, std::abs(x));
  if (mx <= tol.rank * scale) throw DegenerateFrame("tangent frame is rank deficient at " + format_point(p));
  const double nn = inner<double>(w, w, sig);
  const double e2 = dot_euclid(w, w);
  if (std::abs(nn) <= tol.null * e2) throw DegenerateNormal("normal is lightlike at " + format_point(p));
  if (nn < 0) throw DegenerateNormal("normal is timelike at " + format_point(p) + "; only spacelike normals are supported");
  return w;
}

std::vector<std::vector<double>> tangent_values(const ImmersionChart& chart, std::span<const double> p) {
  const int d = chart.dim();
  std::vector<std::vector<double>> t(static_cast<std::size_t>(d));
  for (const auto& c : chart.components) {
    const Jet j = jet_eval(c, p, 1, chart.bank);
    for (int i = 0; i < d; ++i) {
      const auto a = alpha_of(d, i);
      t[i].push_back(j.partial(a));
    }
  }
  return t;
}

AmbientVector base_normal(const ImmersionChart& chart, const Tolerances& tol) {
  const auto b = chart.base();
  auto w = checked_cross(tangent_values(chart, b), chart.signature, b, tol);
  const double f = last_nonzero_sign(w) / std::sqrt(inner<double>(w, w, chart.signature));
  for (auto& x : w) x *= f;
  return AmbientVector(std::move(w), chart.signature);
}

// +1 or -1 so that sign * w points along the reference normal.
double orientation_sign(const ImmersionChart& chart, std::span<const double> w, const AmbientVector* reference,
                        const Tolerances& tol) {
  AmbientVector ref_storage{chart.signature};
  if (!reference) {
    ref_storage = base_normal(chart, tol);
    reference = &ref_storage;
  }
  const double dp = dot_euclid(w, reference->components());
  if (std::abs(dp) <= 1e-12 * euclid(w) * reference->euclidean_norm()) return last_nonzero_sign(w);
  return dp > 0 ? 1.0 : -1.0;
}

// Hypersurface quantities from plain tangents and second derivatives.
struct FrameCurvature {
  Eigen::MatrixXd G, G_inv, B, S;
  AmbientVector N{Signature{}};
  double H = 0.0;
  int index = 0;
};

FrameCurvature frame_curvature(const ImmersionChart& chart, const ChartFrame& f, std::span<const double> p,
                               const AmbientVector* reference, const Tolerances& tol) {
  const int d = chart.dim();
  const auto& sig = chart.signature;
  FrameCurvature out;
  out.G.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out.G(i, j) = inner<double>(f.tangents[i], f.tangents[j], sig);
  out.index = check_metric(out.G, chart.expected_index, p, tol);
  out.G_inv = out.G.inverse();
  auto w = checked_cross(f.tangents, sig, p, tol);
  const double scale = orientation_sign(chart, w, reference, tol) / std::sqrt(inner<double>(w, w, sig));
  for (auto& x : w) x *= scale;
  out.N = AmbientVector(w, sig);
  out.B.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out.B(i, j) = inner<double>(f.hessian[i * d + j], w, sig);
  out.S = out.G_inv * out.B;
  out.H = out.S.trace() / d;
  return out;
}

void finish_packet(CurvaturePacket& pk, const Tolerances& tol) {
  const int d = pk.dim;
  const Eigen::VectorXd push = [&] {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(pk.N.dim());
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < pk.N.dim(); ++a) v[a] += pk.gradH[i] * pk.tangents[i][a];
    return v;
  }();
  pk.gradH_ambient = AmbientVector(std::vector<double>(push.data(), push.data() + push.size()), pk.N.signature());
  pk.cmc = push.norm() < tol.cmc;
  pk.gradH_causality = causal_character(pk.gradH_ambient, tol.null);
}

Eigen::VectorXd pushforward(const CurvaturePacket& pk, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(pk.N.dim());
  for (int i = 0; i < pk.dim; ++i)
    for (int a = 0; a < pk.N.dim(); ++a) out[a] += v[i] * pk.tangents[i][a];
  return out;
}

}  // namespace

void ImmersionChart::validate() const {
  const int d = dim();
  if (d < 1 || d > kMaxJetVars) throw ContractViolation("chart '" + id + "' has an unsupported parameter count");
  if (static_cast<int>(components.size()) != signature.dim)
    throw ContractViolation("chart '" + id + "' has " + std::to_string(components.size()) +
                            " components for an ambient space of dimension " + std::to_string(signature.dim));
  if (d >= signature.dim) throw ContractViolation("chart '" + id + "' has no normal directions");
  if (domain.dim() != static_cast<std::size_t>(d))
    throw ContractViolation("chart '" + id + "' domain dimension does not match its parameters");
}

ChartFrame chart_frame(const ImmersionChart& chart, std::span<const double> p) {
  chart.validate();
  const int d = chart.dim();
  ChartFrame f;
  f.tangents.assign(static_cast<std::size_t>(d), {});
  f.hessian.assign(static_cast<std::size_t>(d * d), {});
  for (const auto& c : chart.components) {
    const Jet j = jet_eval(c, p, 2, chart.bank);
    f.position.push_back(j.value());
    for (int i = 0; i < d; ++i) {
      f.tangents[i].push_back(j.partial(alpha_of(d, i)));
      for (int k = 0; k < d; ++k) f.hessian[i * d + k].push_back(j.partial(alpha_of(d, i, k)));
    }
  }
  return f;
}

int check_metric(const Eigen::MatrixXd& G, int expected_index, std::span<const double> p, const Tolerances& tol) {
  const int d = static_cast<int>(G.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  double det = 1.0;
  int index = 0;
  for (int i = 0; i < d; ++i) {
    det *= ev[i];
    if (ev[i] < 0) ++index;
  }
  const double gmax = G.cwiseAbs().maxCoeff();
  if (std::abs(det) <= tol.degenerate * std::pow(1.0 + gmax, d))
    throw DegenerateMetric("induced metric is degenerate at " + format_point(p));
  if (expected_index >= 0 && index != expected_index) throw UnexpectedIndex(index, expected_index);
  return index;
}

AmbientVector oriented_normal(const ImmersionChart& chart, std::span<const double> p, const AmbientVector* reference,
                              const Tolerances& tol) {
  chart.validate();
  if (!chart.is_hypersurface()) throw ContractViolation("chart '" + chart.id + "' is not a hypersurface");
  auto w = checked_cross(tangent_values(chart, p), chart.signature, p, tol);
  const double f = orientation_sign(chart, w, reference, tol) / std::sqrt(inner<double>(w, w, chart.signature));
  for (auto& x : w) x *= f;
  return AmbientVector(std::move(w), chart.signature);
}

std::vector<AmbientVector> propagate_normals(const ImmersionChart& chart, std::span<const std::vector<double>> points,
                                             const Tolerances& tol) {
  std::vector<AmbientVector> out;
  out.reserve(points.size());
  AmbientVector prev = base_normal(chart, tol);
  for (const auto& p : points) {
    out.push_back(oriented_normal(chart, p, &prev, tol));
    prev = out.back();
  }
  return out;
}

CurvaturePacket packet(const ImmersionChart& chart, std::span<const double> p, const AmbientVector* reference,
                       const Tolerances& tol) {
  if (!chart.is_hypersurface()) throw ContractViolation("chart '" + chart.id + "' is not a hypersurface");
  const JetGeometry g = jet_geometry(chart, p, tol, true);
  const int d = g.d, m = g.m;
  const auto& sig = chart.signature;

  std::vector<std::vector<Jet>> T1(static_cast<std::size_t>(d));
  std::vector<std::vector<double>> Tv(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < m; ++a) {
      T1[i].push_back(g.T[i][a].truncated(1));
      Tv[i].push_back(g.T[i][a].value());
    }
  const auto wv = checked_cross(Tv, sig, p, tol);
  const double sign = orientation_sign(chart, wv, reference, tol);
  std::vector<Jet> W = metric_cross<Jet>(T1, sig);
  const Jet nn = inner<Jet>(W, W, sig);
  const Jet scale = sign * reciprocal(sqrt(nn));
  std::vector<Jet> N;
  for (auto& w : W) N.push_back(w * scale);

  std::vector<Jet> B;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) B.push_back(i <= j ? inner<Jet>(g.Hs[i * d + j], N, sig) : B[j * d + i]);

  Jet H = Jet::constant(d, 1, 0.0);
  CurvaturePacket pk;
  pk.dim = d;
  pk.point.assign(p.begin(), p.end());
  pk.G = g.Gv;
  pk.G_inv = g.Ginv_v;
  pk.metric_index = g.index;
  pk.B.resize(d, d);
  pk.S.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Jet s = Jet::constant(d, 1, 0.0);
      for (int k = 0; k < d; ++k) s += g.Ginv[i * d + k] * B[k * d + j];
      pk.S(i, j) = s.value();
      pk.B(i, j) = B[i * d + j].value();
      if (i == j) H += s;
    }
  H /= static_cast<double>(d);
  pk.H = H.value();

  std::vector<double> nv;
  for (const auto& n : N) nv.push_back(n.value());
  pk.N = AmbientVector(nv, sig);
  Eigen::VectorXd dH(d);
  for (int j = 0; j < d; ++j) dH[j] = H.partial(alpha_of(d, j));
  pk.gradH = g.Ginv_v * dH;
  for (int i = 0; i < d; ++i) pk.tangents.emplace_back(Tv[i], sig);
  for (const auto& gm : g.Gamma) pk.christoffel.push_back(gm.value());
  finish_packet(pk, tol);
  return pk;
}

CurvaturePacket packet_fd(const ImmersionChart& chart, std::span<const double> p, const AmbientVector* reference,
                          const Tolerances& tol, double h_step) {
  chart.validate();
  if (!chart.is_hypersurface()) throw ContractViolation("chart '" + chart.id + "' is not a hypersurface");
  const int d = chart.dim();
  auto frame_at = [&](std::span<const double> q) {
    ChartFrame f;
    f.tangents.assign(static_cast<std::size_t>(d), {});
    f.hessian.assign(static_cast<std::size_t>(d * d), {});
    for (const auto& c : chart.components) {
      f.position.push_back(evaluate(c, q, chart.bank));
      for (int i = 0; i < d; ++i) {
        f.tangents[i].push_back(fd_oracle(c, q, alpha_of(d, i), chart.bank));
        for (int k = 0; k < d; ++k) f.hessian[i * d + k].push_back(fd_oracle(c, q, alpha_of(d, i, k), chart.bank));
      }
    }
    return f;
  };
  const ChartFrame f = frame_at(p);
  const FrameCurvature fc = frame_curvature(chart, f, p, reference, tol);

  CurvaturePacket pk;
  pk.dim = d;
  pk.point.assign(p.begin(), p.end());
  pk.G = fc.G;
  pk.G_inv = fc.G_inv;
  pk.B = fc.B;
  pk.S = fc.S;
  pk.H = fc.H;
  pk.N = fc.N;
  pk.metric_index = fc.index;
  for (int i = 0; i < d; ++i) pk.tangents.emplace_back(f.tangents[i], chart.signature);

  Eigen::VectorXd dH(d);
  std::vector<double> q(p.begin(), p.end());
  for (int j = 0; j < d; ++j) {
    const double x0 = q[j];
    q[j] = x0 + h_step;
    const double hp = frame_curvature(chart, frame_at(q), q, &fc.N, tol).H;
    q[j] = x0 - h_step;
    const double hm = frame_curvature(chart, frame_at(q), q, &fc.N, tol).H;
    q[j] = x0;
    dH[j] = (hp - hm) / (2.0 * h_step);
  }
  pk.gradH = fc.G_inv * dH;
  finish_packet(pk, tol);
  return pk;
}

double biconservative_residual(const CurvaturePacket& pk) {
  if (pk.cmc) return 0.0;
  const Eigen::VectorXd v = pk.S * pk.gradH + (0.5 * pk.dim * pk.H) * pk.gradH;
  return pushforward(pk, v).norm() / std::max(1.0, pushforward(pk, pk.gradH).norm());
}

double biconservative_residual(const ImmersionChart& chart, std::span<const double> p) {
  return biconservative_residual(packet(chart, p));
}

std::optional<double> principal_direction_check(const CurvaturePacket& pk) {
  if (pk.cmc) return std::nullopt;
  const Eigen::VectorXd& g = pk.gradH;
  const Eigen::VectorXd Sg = pk.S * g;
  const double eig = pushforward(pk, Sg + (0.5 * pk.dim * pk.H) * g).norm() / pushforward(pk, g).norm();
  const double k1 = g.dot(Sg) / g.dot(g);
  const double trace = std::abs((pk.S.trace() - k1) - 1.5 * pk.dim * pk.H);
  return std::max(eig, trace) / std::max(1.0, pk.S.cwiseAbs().maxCoeff());
}

std::optional<double> principal_direction_check(const ImmersionChart& chart, std::span<const double> p) {
  return principal_direction_check(packet(chart, p));
}

IdentityResiduals identity_residuals(const ImmersionChart& chart, std::span<const double> p, const Tolerances& tol) {
  const JetGeometry g = jet_geometry(chart, p, tol, true);
  const int d = g.d, m = g.m;
  const auto& sig = chart.signature;

  std::vector<std::vector<double>> Tv(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < m; ++a) Tv[i].push_back(g.T[i][a].value());

  // Normal projection of an ambient vector given as jets or values.
  auto project = [&](const auto& v) {
    using V = std::decay_t<decltype(v[0])>;
    std::vector<V> coef;
    for (int k = 0; k < d; ++k) {
      V c = v[0] * 0.0;
      for (int l = 0; l < d; ++l) {
        V tl_dot;
        if constexpr (std::is_same_v<V, Jet>)
          tl_dot = inner<Jet>(v, g.T[l], sig);
        else
          tl_dot = inner<double>(v, Tv[l], sig);
        if constexpr (std::is_same_v<V, Jet>)
          c += g.Ginv[k * d + l] * tl_dot;
        else
          c += g.Ginv_v(k, l) * tl_dot;
      }
      coef.push_back(c);
    }
    std::vector<V> out(v.begin(), v.end());
    for (int k = 0; k < d; ++k)
      for (int a = 0; a < m; ++a) {
        if constexpr (std::is_same_v<V, Jet>)
          out[a] -= coef[k] * g.T[k][a];
        else
          out[a] -= coef[k] * Tv[k][a];
      }
    return out;
  };

  // h_ij as order-1 jets and as values.
  std::vector<std::vector<Jet>> h;
  std::vector<std::vector<double>> hv;
  double hmax = 0.0;
  for (int ij = 0; ij < d * d; ++ij) {
    h.push_back(project(g.Hs[ij]));
    std::vector<double> val;
    for (const auto& c : h.back()) val.push_back(c.value());
    hmax = std::max(hmax, euclid(val));
    hv.push_back(std::move(val));
  }
  const double norm = (1.0 + hmax) * (1.0 + hmax);
  auto gamma = [&](int k, int i, int j) -> const Jet& { return g.Gamma[(k * d + i) * d + j]; };

  IdentityResiduals r;

  // Beltrami.
  std::vector<double> lap(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double gij = g.Ginv_v(i, j);
      for (int a = 0; a < m; ++a) {
        double v = g.Hs[i * d + j][a].value();
        for (int k = 0; k < d; ++k) v -= gamma(k, i, j).value() * Tv[k][a];
        lap[a] += gij * v;
      }
    }
  std::vector<double> trace_h(static_cast<std::size_t>(m), 0.0);
  if (chart.is_hypersurface()) {
    const auto w = checked_cross(Tv, sig, p, tol);
    const double inv = 1.0 / std::sqrt(inner<double>(w, w, sig));
    std::vector<double> n;
    for (double x : w) n.push_back(x * inv);
    Eigen::MatrixXd B(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        std::vector<double> hess;
        for (const auto& c : g.Hs[i * d + j]) hess.push_back(c.value());
        B(i, j) = inner<double>(hess, n, sig);
      }
    const double H = (g.Ginv_v * B).trace() / d;
    for (int a = 0; a < m; ++a) trace_h[a] = d * H * n[a];
  } else {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int a = 0; a < m; ++a) trace_h[a] += g.Ginv_v(i, j) * hv[i * d + j][a];
  }
  for (int a = 0; a < m; ++a) lap[a] -= trace_h[a];
  r.beltrami = euclid(lap);

  // Gauss: <R(d_i, d_j) d_k, d_w> = <h_jk, h_iw> - <h_ik, h_jw>.
  std::vector<double> Gam;
  for (const auto& gm : g.Gamma) Gam.push_back(gm.value());
  auto G3 = [&](int k, int i, int j) { return Gam[static_cast<std::size_t>((k * d + i) * d + j)]; };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      for (int k = 0; k < d; ++k) {
        std::vector<double> Rl(static_cast<std::size_t>(d), 0.0);
        for (int l = 0; l < d; ++l) {
          double v = gamma(l, j, k).partial(alpha_of(d, i)) - gamma(l, i, k).partial(alpha_of(d, j));
          for (int q = 0; q < d; ++q) v += G3(l, i, q) * G3(q, j, k) - G3(l, j, q) * G3(q, i, k);
          Rl[l] = v;
        }
        for (int w = 0; w < d; ++w) {
          double R = 0.0;
          for (int l = 0; l < d; ++l) R += g.Gv(w, l) * Rl[l];
          const double rhs = inner<double>(hv[j * d + k], hv[i * d + w], sig) -
                             inner<double>(hv[i * d + k], hv[j * d + w], sig);
          r.gauss = std::max(r.gauss, std::abs(R - rhs) / norm);
        }
      }
    }

  // Codazzi: C_kij = P(d_k h_ij) - Gamma^l_ki h_lj - Gamma^l_kj h_il symmetric in k, i.
  auto codazzi = [&](int k, int i, int j) {
    std::vector<double> dh;
    for (const auto& c : h[i * d + j]) dh.push_back(c.partial(alpha_of(d, k)));
    auto out = project(dh);
    for (int l = 0; l < d; ++l)
      for (int a = 0; a < m; ++a) out[a] -= G3(l, k, i) * hv[l * d + j][a] + G3(l, k, j) * hv[i * d + l][a];
    return out;
  };
  for (int k = 0; k < d; ++k)
    for (int i = k + 1; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const auto a = codazzi(k, i, j), b = codazzi(i, k, j);
        std::vector<double> diff(a.size());
        for (std::size_t q = 0; q < a.size(); ++q) diff[q] = a[q] - b[q];
        r.codazzi = std::max(r.codazzi, euclid(diff) / norm);
      }
  return r;
}

double beltrami_residual(const ImmersionChart& chart, std::span<const double> p) {
  return identity_residuals(chart, p).beltrami;
}

GaussCodazzi gauss_codazzi_residual(const ImmersionChart& chart, std::span<const double> p) {
  const auto r = identity_residuals(chart, p);
  return {r.gauss, r.codazzi};
}

FundamentalForms fundamental_forms(const ImmersionChart& chart, std::span<const double> p, const Tolerances& tol) {
  const ChartFrame f = chart_frame(chart, p);
  const int d = chart.dim();
  const auto& sig = chart.signature;
  FundamentalForms out;
  out.G.resize(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out.G(i, j) = inner<double>(f.tangents[i], f.tangents[j], sig);
  out.metric_index = check_metric(out.G, chart.expected_index, p, tol);
  const Eigen::MatrixXd Gi = out.G.inverse();
  for (int ij = 0; ij < d * d; ++ij) {
    std::vector<double> v = f.hessian[ij];
    for (int k = 0; k < d; ++k) {
      double c = 0.0;
      for (int l = 0; l < d; ++l) c += Gi(k, l) * inner<double>(f.hessian[ij], f.tangents[l], sig);
      for (std::size_t a = 0; a < v.size(); ++a) v[a] -= c * f.tangents[k][a];
    }
    out.h.emplace_back(std::move(v), sig);
  }
  return out;
}

}  // namespace biconserve
