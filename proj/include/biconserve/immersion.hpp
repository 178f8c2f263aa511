#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biconserve/ambient.hpp"
#include "biconserve/box.hpp"
#include "biconserve/expression.hpp"
#include "biconserve/profile.hpp"

namespace biconserve {

/// Smooth map from a parameter box into a pseudo-Euclidean space.
///
/// A chart with components.size() == dim() + 1 is a hypersurface and gets the
/// full curvature packet. Lower-dimensional charts (the integral surfaces and
/// curves) only support first/second fundamental forms and identity checks.
struct ImmersionChart {
  std::string id;
  std::vector<std::string> param_names;
  std::vector<Expr> components;
  ParameterBox domain;
  ProfileBank bank;
  Signature signature;
  int expected_index = 2;
  /// Where the orientation rule is anchored; empty means the domain center.
  std::vector<double> base_point;

  int dim() const { return static_cast<int>(param_names.size()); }
  bool is_hypersurface() const { return static_cast<int>(components.size()) == dim() + 1; }
  std::vector<double> base() const { return base_point.empty() ? domain.center() : base_point; }
  /// Check component count against the signature and parameter count.
  void validate() const;
};

/// Position, tangents and second derivatives at a point, as plain numbers.
struct ChartFrame {
  std::vector<double> position;
  std::vector<std::vector<double>> tangents;  // d vectors of length m
  std::vector<std::vector<double>> hessian;   // d*d vectors, row-major in (i, j)
};

ChartFrame chart_frame(const ImmersionChart& chart, std::span<const double> p);

struct Tolerances {
  double null = kDefaultNullTolerance;
  double rank = kDefaultRankTolerance;
  double degenerate = 1e-10;  // |det G| <= degenerate * (1 + |G|_max)^d
  double cmc = 1e-8;          // pushforward of grad H below this is treated as zero
};

struct CurvaturePacket {
  int dim = 0;
  std::vector<double> point;
  Eigen::MatrixXd G, G_inv, B, S;
  AmbientVector N{Signature{}};
  double H = 0.0;
  Eigen::VectorXd gradH;  // contravariant chart components
  AmbientVector gradH_ambient{Signature{}};
  std::vector<AmbientVector> tangents;
  /// christoffel[(k * d + i) * d + j] = Gamma^k_ij; empty for the FD packet.
  std::vector<double> christoffel;
  int metric_index = 0;
  bool cmc = false;  // |push grad H| < tolerance
  Causality gradH_causality{CausalCharacter::Lightlike, true};

  double gamma(int k, int i, int j) const { return christoffel[static_cast<std::size_t>((k * dim + i) * dim + j)]; }
};

/// Unit normal at p oriented by the chart's rule: the last nonzero component
/// of the metric cross product is positive at the base point, and other points
/// match the sign of `reference` (default: the oriented base normal) by
/// Euclidean dot product.
AmbientVector oriented_normal(const ImmersionChart& chart, std::span<const double> p,
                              const AmbientVector* reference = nullptr, const Tolerances& tol = {});

/// Oriented normals along a sequence of points, each sign-matched to the one
/// before it and the first to the base normal.
std::vector<AmbientVector> propagate_normals(const ImmersionChart& chart, std::span<const std::vector<double>> points,
                                             const Tolerances& tol = {});

/// Full packet from jets. H is a jet of order 1 built from order-3 jets of x,
/// so gradH is exact up to roundoff.
CurvaturePacket packet(const ImmersionChart& chart, std::span<const double> p, const AmbientVector* reference = nullptr,
                       const Tolerances& tol = {});

/// Same quantities from finite differences only: tangents and second
/// derivatives from `fd_oracle`, grad H from central differences of the
/// H field with step `h_step`.
CurvaturePacket packet_fd(const ImmersionChart& chart, std::span<const double> p,
                          const AmbientVector* reference = nullptr, const Tolerances& tol = {},
                          double h_step = 2e-3);

/// Metric index and degeneracy of G at p; throws DegenerateMetric or
/// UnexpectedIndex.
int check_metric(const Eigen::MatrixXd& G, int expected_index, std::span<const double> p, const Tolerances& tol);

/// |push(S gradH + (d/2) H gradH)|_E / max(1, |push gradH|_E); 0 for CMC
/// points. For d = 4 this is S(grad H) = -2H grad H.
double biconservative_residual(const CurvaturePacket& pk);
double biconservative_residual(const ImmersionChart& chart, std::span<const double> p);

/// max of |S gradH + (d/2) H gradH| / |gradH| and
/// |(tr S - k1) - (3d/2) H| with k1 the Rayleigh quotient of S along gradH,
/// scaled by max(1, |S|_max). nullopt at CMC points.
std::optional<double> principal_direction_check(const CurvaturePacket& pk);
std::optional<double> principal_direction_check(const ImmersionChart& chart, std::span<const double> p);

struct IdentityResiduals {
  double beltrami = 0.0;
  double gauss = 0.0;
  double codazzi = 0.0;
};

/// Beltrami, Gauss and Codazzi residuals at p for any chart dimension.
/// Beltrami: |G^ij (x_ij - Gamma^k_ij x_k) - trace of h|_E, where for a
/// hypersurface the trace of h is d H N. Gauss and Codazzi compare the
/// intrinsic curvature from Christoffels with the normal-projected second
/// derivatives and are divided by (1 + max_ij |h_ij|_E)^2.
IdentityResiduals identity_residuals(const ImmersionChart& chart, std::span<const double> p, const Tolerances& tol = {});

double beltrami_residual(const ImmersionChart& chart, std::span<const double> p);

struct GaussCodazzi {
  double gauss = 0.0;
  double codazzi = 0.0;
};

GaussCodazzi gauss_codazzi_residual(const ImmersionChart& chart, std::span<const double> p);

/// First and second fundamental forms for a chart of any codimension.
struct FundamentalForms {
  Eigen::MatrixXd G;
  std::vector<AmbientVector> h;  // d*d normal vectors, row-major
  int metric_index = 0;
};

FundamentalForms fundamental_forms(const ImmersionChart& chart, std::span<const double> p, const Tolerances& tol = {});

}  // namespace biconserve
