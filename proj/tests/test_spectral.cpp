#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "biconserve/errors.hpp"
#include "biconserve/spectral.hpp"

using namespace biconserve;
using Eigen::Matrix4d;
using Eigen::MatrixXd;

namespace {

MatrixXd paper_jordan_metric(double e1) {
  MatrixXd g = MatrixXd::Zero(4, 4);
  g(0, 0) = e1;
  g(1, 2) = g(2, 1) = -1;
  g(3, 3) = -e1;
  return g;
}

struct Planted {
  MatrixXd S0, G0;
  std::vector<double> real;  // expanded, ascending
  ComplexPair pair;
  ShapeCase label;
};

// Four well-separated values in [-3, 3].
std::vector<double> separated(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> U(-3, 3);
  for (;;) {
    std::vector<double> v(k);
    for (auto& x : v) x = U(rng);
    std::sort(v.begin(), v.end());
    bool ok = true;
    for (int i = 1; i < k; ++i) ok = ok && v[i] - v[i - 1] > 0.05;
    if (ok) return v;
  }
}

Planted plant(ShapeCase which, std::mt19937_64& rng) {
  Planted p;
  p.label = which;
  p.S0 = MatrixXd::Zero(4, 4);
  if (which == ShapeCase::I) {
    const auto v = separated(rng, 4);
    std::vector<double> perm = v;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < 4; ++i) p.S0(i, i) = perm[i];
    p.G0 = Eigen::Vector4d(-1, -1, 1, 1).asDiagonal();
    p.real = v;
  } else if (which == ShapeCase::II) {
    const auto v = separated(rng, 3);  // -2H, k2, k4
    p.S0(0, 0) = v[0];
    p.S0(1, 1) = p.S0(2, 2) = v[1];
    p.S0(1, 2) = 1;
    p.S0(3, 3) = v[2];
    p.G0 = paper_jordan_metric(rng() % 2 ? 1.0 : -1.0);
    p.real = {v[0], v[1], v[1], v[2]};
  } else if (which == ShapeCase::III) {
    const auto v = separated(rng, 3);
    std::uniform_real_distribution<double> nu(0.2, 2.0);
    const double n = nu(rng);
    p.S0(0, 0) = v[0];
    p.S0(1, 1) = p.S0(2, 2) = v[1];
    p.S0(1, 2) = -n;
    p.S0(2, 1) = n;
    p.S0(3, 3) = v[2];
    p.G0 = Eigen::Vector4d(1, -1, 1, -1).asDiagonal();
    p.real = {v[0], v[2]};
    p.pair = {v[1], n};
  } else {
    std::uniform_real_distribution<double> U(0.3, 2.0);
    const double H = U(rng) * (rng() % 2 ? 1 : -1);
    p.S0 << -2 * H, 0, 0, 0, 0, 2 * H, 0, 0, 0, 0, 2 * H, -1, 0, 1, 0, 2 * H;
    p.G0 = paper_jordan_metric(-1.0);
    p.real = {-2 * H, 2 * H, 2 * H, 2 * H};
    std::sort(p.real.begin(), p.real.end());
  }
  return p;
}

// Well-conditioned change of frame: random orthogonal times a diagonal in [0.5, 2].
MatrixXd random_frame(std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  std::uniform_real_distribution<double> D(0.5, 2.0);
  MatrixXd A(4, 4);
  for (int i = 0; i < 16; ++i) A.data()[i] = N(rng);
  Eigen::HouseholderQR<MatrixXd> qr(A);
  MatrixXd Q = qr.householderQ();
  Eigen::Vector4d d;
  for (int i = 0; i < 4; ++i) d[i] = D(rng);
  return Q * d.asDiagonal();
}

}  // namespace

TEST_CASE("characteristic quartic") {
  CHECK(characteristic_quartic(Matrix4d::Zero()) == std::array<double, 5>{1, 0, 0, 0, 0});
  const Matrix4d D = Eigen::Vector4d(1, 2, 2, 3).asDiagonal();
  const auto c = characteristic_quartic(D);
  const std::array<double, 5> want{1, -8, 23, -28, 12};
  for (int i = 0; i < 5; ++i) CHECK(c[i] == doctest::Approx(want[i]).epsilon(1e-14));
}

TEST_CASE("characteristic polynomial is invariant under similarity") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 200; ++trial) {
    MatrixXd S(4, 4);
    for (int i = 0; i < 16; ++i) S.data()[i] = N(rng);
    const MatrixXd P = random_frame(rng);
    const auto a = characteristic_polynomial(S);
    const auto b = characteristic_polynomial(P.inverse() * S * P);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10 * (1 + std::abs(a[i])));
  }
}

TEST_CASE("canonical forms classify directly") {
  SUBCASE("Case I: four simple eigenvalues") {
    const MatrixXd S = Eigen::Vector4d(-0.8, 0.3, 1.1, 2.0).asDiagonal();
    const MatrixXd G = Eigen::Vector4d(-1, 1, -1, 1).asDiagonal();
    const auto sp = eigen_structure(S, G);
    CHECK(sp.case_label == ShapeCase::I);
    CHECK(multiplicity_pattern(sp) == "1+1+1+1");
    REQUIRE(sp.real_eigenvalues.size() == 4);
    CHECK(sp.real_eigenvalues[0].value == doctest::Approx(-0.8));
  }
  SUBCASE("Case II: Jordan block with the off-diagonal metric") {
    MatrixXd S = MatrixXd::Zero(4, 4);
    S(0, 0) = -1.0;
    S(1, 1) = S(2, 2) = 0.5;
    S(1, 2) = 1.0;
    S(3, 3) = 2.0;
    for (double e1 : {1.0, -1.0}) {
      const auto sp = eigen_structure(S, paper_jordan_metric(e1));
      CHECK(sp.case_label == ShapeCase::II);
      REQUIRE(sp.real_eigenvalues.size() == 3);
      CHECK(sp.real_eigenvalues[1].value == doctest::Approx(0.5));
      CHECK(sp.real_eigenvalues[1].algebraic == 2);
      CHECK(sp.real_eigenvalues[1].geometric == 1);
      CHECK(classify_case(sp).pattern == "1+2+1");
    }
  }
  SUBCASE("Case III: rotation block") {
    MatrixXd S = MatrixXd::Zero(4, 4);
    S(0, 0) = 1.0;
    S(1, 1) = S(2, 2) = -0.4;
    S(1, 2) = -0.7;
    S(2, 1) = 0.7;
    S(3, 3) = 3.0;
    const auto sp = eigen_structure(S, Eigen::Vector4d(1, -1, 1, -1).asDiagonal());
    CHECK(sp.case_label == ShapeCase::III);
    REQUIRE(sp.complex_pairs.size() == 1);
    CHECK(sp.complex_pairs[0].re == doctest::Approx(-0.4));
    CHECK(sp.complex_pairs[0].im == doctest::Approx(0.7));
    CHECK(classify_case(sp).pattern == "1+1+2c");
  }
  SUBCASE("Case IV: triple eigenvalue with one eigenvector") {
    Matrix4d S;
    const double H = 0.6;
    S << -2 * H, 0, 0, 0, 0, 2 * H, 0, 0, 0, 0, 2 * H, -1, 0, 1, 0, 2 * H;
    const auto sp = eigen_structure(S, paper_jordan_metric(-1.0));
    CHECK(sp.case_label == ShapeCase::IV);
    REQUIRE(sp.real_eigenvalues.size() == 2);
    CHECK(sp.real_eigenvalues[1].value == doctest::Approx(2 * H).epsilon(1e-10));
    CHECK(sp.real_eigenvalues[1].algebraic == 3);
    CHECK(sp.real_eigenvalues[1].geometric == 1);
    CHECK(classify_case(sp).pattern == "1+3");
  }
  SUBCASE("repeated diagonalizable eigenvalue") {
    const MatrixXd S = Eigen::Vector4d(1.5, 0.0, 0.0, -2.0).asDiagonal();
    const auto sp = eigen_structure(S, Eigen::Vector4d(-1, -1, 1, 1).asDiagonal());
    CHECK(sp.case_label == ShapeCase::I);
    CHECK(classify_case(sp).pattern == "1+2+1");
    const auto e = sp.expanded();
    CHECK(std::count(e.begin(), e.end(), 0.0) == 2);
  }
  SUBCASE("patterns without a simple eigenvalue") {
    const auto s22 = eigen_structure(Eigen::Vector4d(1, 1, 2, 2).asDiagonal(), Eigen::Vector4d(-1, -1, 1, 1).asDiagonal());
    CHECK(classify_case(s22).pattern == "2+2");
    const auto s4 = eigen_structure(MatrixXd::Identity(4, 4) * 0.3, Eigen::Vector4d(-1, -1, 1, 1).asDiagonal());
    CHECK(classify_case(s4).pattern == "4");
    CHECK(s4.case_label == ShapeCase::I);
  }
  SUBCASE("five dimensions") {
    const MatrixXd S = (Eigen::VectorXd(5) << 1, 2, 3, 4, 5).finished().asDiagonal();
    const MatrixXd G = (Eigen::VectorXd(5) << -1, -1, 1, 1, 1).finished().asDiagonal();
    const auto sp = eigen_structure(S, G);
    CHECK(classify_case(sp).pattern == "1+1+1+1+1");
  }
}

TEST_CASE("ambiguity band refuses to classify") {
  const MatrixXd G = Eigen::Vector4d(-1, -1, 1, 1).asDiagonal();
  // Two eigenvalues 3e-6 apart: outside the merge radius (~1e-6 * 4) but within ten times it.
  const auto sp = eigen_structure(Eigen::Vector4d(-1, 1.0, 1.0 + 1.5e-5, 2).asDiagonal(), G);
  CHECK(sp.case_label == ShapeCase::Unresolved);
  CHECK_FALSE(sp.note.empty());
  CHECK(classify_case(sp).label == ShapeCase::Unresolved);
  // Well outside the band: resolved.
  const auto ok = eigen_structure(Eigen::Vector4d(-1, 1.0, 1.001, 2).asDiagonal(), G);
  CHECK(ok.case_label == ShapeCase::I);
  // Below the merge radius: a double eigenvalue.
  const auto merged = eigen_structure(Eigen::Vector4d(-1, 1.0, 1.0 + 1e-9, 2).asDiagonal(), G);
  CHECK(merged.case_label == ShapeCase::I);
  CHECK(classify_case(merged).pattern == "1+2+1");
}

TEST_CASE("non-self-adjoint input is a contract violation") {
  MatrixXd S = Eigen::Vector4d(1, 2, 3, 4).asDiagonal();
  S(0, 1) = 0.5;
  CHECK_THROWS_AS(eigen_structure(S, Eigen::Vector4d(-1, -1, 1, 1).asDiagonal()), ContractViolation);
  CHECK_THROWS_AS(eigen_structure(MatrixXd::Identity(4, 4), MatrixXd::Zero(4, 4)), ContractViolation);
  CHECK_THROWS_AS(eigen_structure(MatrixXd::Identity(3, 3), MatrixXd::Identity(4, 4)), ContractViolation);
}

TEST_CASE("planted conjugations recover eigenvalues and labels") {
  std::mt19937_64 rng(2024);
  for (ShapeCase which : {ShapeCase::I, ShapeCase::II, ShapeCase::III, ShapeCase::IV}) {
    CAPTURE(to_string(which));
    int correct = 0, unresolved = 0, wrong = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto p = plant(which, rng);
      const MatrixXd P = random_frame(rng);
      const MatrixXd S = P.inverse() * p.S0 * P;
      const MatrixXd G = P.transpose() * p.G0 * P;
      const auto sp = eigen_structure(S, G);
      if (sp.case_label == which) ++correct;
      else if (sp.case_label == ShapeCase::Unresolved) { ++unresolved; continue; }
      else { ++wrong; continue; }
      const auto got = sp.expanded();
      REQUIRE(got.size() == p.real.size());
      for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - p.real[i]));
      if (which == ShapeCase::III) {
        worst = std::max(worst, std::abs(sp.complex_pairs[0].re - p.pair.re));
        worst = std::max(worst, std::abs(sp.complex_pairs[0].im - p.pair.im));
      }
      CHECK(std::abs(sp.trace() - S.trace()) < 1e-9);
    }
    CHECK(wrong == 0);
    CHECK(correct >= 999);
    CHECK(correct + unresolved == 1000);
    CHECK(worst < 1e-8);
  }
}
