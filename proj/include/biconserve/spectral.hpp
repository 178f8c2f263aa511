#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace biconserve {

enum class ShapeCase { I, II, III, IV, Unresolved };

std::string to_string(ShapeCase c);

struct RealEigenvalue {
  double value = 0.0;
  int algebraic = 1;
  int geometric = 1;
};

struct ComplexPair {
  double re = 0.0;
  double im = 0.0;  // > 0
};

/// Eigen-structure of S as an endomorphism that is self-adjoint for G.
struct ShapeSpectrum {
  int n = 0;
  std::vector<RealEigenvalue> real_eigenvalues;  // ascending by value
  std::vector<ComplexPair> complex_pairs;
  ShapeCase case_label = ShapeCase::Unresolved;
  double clustering_tol = 0.0;  // absolute radius used for simple clusters
  std::string note;             // why the label is Unresolved, if it is

  /// Sum of algebraic multiplicity times value plus twice the real parts.
  double trace() const;
  /// Real eigenvalues repeated by algebraic multiplicity, ascending.
  std::vector<double> expanded() const;
};

/// Monic characteristic polynomial det(lambda I - S), highest degree first,
/// from power sums tr(S^k) and Newton's identities.
std::vector<double> characteristic_polynomial(const Eigen::MatrixXd& S);
std::array<double, 5> characteristic_quartic(const Eigen::Matrix4d& S);

constexpr double kDefaultSpectralTolerance = 1e-6;

/// Eigenvalues of S clustered into multiplicities. Throws ContractViolation
/// if G S is not symmetric to tol * max(1, |G| |S|) or if G is singular.
/// Clusters whose separation falls in the band between the merge radius and
/// ten times it leave the label Unresolved.
ShapeSpectrum eigen_structure(const Eigen::MatrixXd& S, const Eigen::MatrixXd& G,
                              double tol = kDefaultSpectralTolerance);

struct Classification {
  ShapeCase label = ShapeCase::Unresolved;
  std::string pattern;  // e.g. "1+2+1"; complex pairs appear as "2c"
};

/// I: real and diagonalizable. II: one eigenvalue with defect 1, no complex
/// pair. III: exactly one complex pair, real part diagonalizable. IV: a
/// triple eigenvalue with a single eigenvector. Anything else is Unresolved.
Classification classify_case(const ShapeSpectrum& spec);

/// Multiplicities written as "1+" followed by the rest in descending order
/// when a simple real eigenvalue exists, otherwise all descending.
std::string multiplicity_pattern(const ShapeSpectrum& spec);

}  // namespace biconserve
