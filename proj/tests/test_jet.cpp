#include <doctest.h>

#include <cmath>
#include <random>

#include "biconserve/jet.hpp"

using namespace biconserve;

namespace {

double d(const Jet& j, std::initializer_list<int> alpha) {
  std::vector<int> a(alpha);
  return j.partial(a);
}

Jet random_jet(std::mt19937_64& rng, int nvars, int order) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Jet j(nvars, order);
  for (std::size_t i = 0; i < j.coefficients().size(); ++i) j.coefficient(i) = u(rng);
  return j;
}

}  // namespace

TEST_CASE("coefficient count is C(n + k, k)") {
  CHECK(Jet::coefficient_count(4, 0) == 1);
  CHECK(Jet::coefficient_count(4, 1) == 5);
  CHECK(Jet::coefficient_count(4, 2) == 15);
  CHECK(Jet::coefficient_count(4, 3) == 35);
  CHECK(Jet::coefficient_count(4, 4) == 70);
  CHECK(Jet::coefficient_count(5, 3) == 56);
}

TEST_CASE("graded layout: lower order is a prefix") {
  for (std::size_t i = 0; i < Jet::coefficient_count(4, 2); ++i) {
    const auto a = Jet::multi_index(4, i);
    CHECK(Jet::index_of(4, a) == i);
    CHECK(Jet::index_of(4, a) < Jet::coefficient_count(4, 2));
  }
}

TEST_CASE("product s*t") {
  const Jet s = Jet::variable(4, 2, 0, 2.0);
  const Jet t = Jet::variable(4, 2, 1, 3.0);
  const Jet f = s * t;
  CHECK(f.value() == doctest::Approx(6.0));
  CHECK(d(f, {1, 0, 0, 0}) == doctest::Approx(3.0));
  CHECK(d(f, {0, 1, 0, 0}) == doctest::Approx(2.0));
  CHECK(d(f, {1, 1, 0, 0}) == doctest::Approx(1.0));
  CHECK(d(f, {2, 0, 0, 0}) == 0.0);
  CHECK(d(f, {0, 0, 1, 0}) == 0.0);
}

TEST_CASE("sinh at zero") {
  const Jet v = Jet::variable(4, 3, 3, 0.0);
  const Jet f = sinh(v);
  CHECK(f.value() == doctest::Approx(0.0));
  CHECK(d(f, {0, 0, 0, 1}) == doctest::Approx(1.0));
  CHECK(d(f, {0, 0, 0, 2}) == doctest::Approx(0.0));
  CHECK(d(f, {0, 0, 0, 3}) == doctest::Approx(1.0));
}

TEST_CASE("elementary functions match their derivatives") {
  const double x0 = 0.7;
  const Jet x = Jet::variable(1, 4, 0, x0);
  auto all = [&](const Jet& f, std::array<double, 5> expect) {
    for (int k = 0; k <= 4; ++k) CHECK(d(f, {k}) == doctest::Approx(expect[k]).epsilon(1e-13));
  };
  all(sin(x), {std::sin(x0), std::cos(x0), -std::sin(x0), -std::cos(x0), std::sin(x0)});
  all(cosh(x), {std::cosh(x0), std::sinh(x0), std::cosh(x0), std::sinh(x0), std::cosh(x0)});
  all(exp(x), {std::exp(x0), std::exp(x0), std::exp(x0), std::exp(x0), std::exp(x0)});
  const double r = std::sqrt(x0);
  all(sqrt(x), {r, 0.5 / r, -0.25 / (r * x0), 0.375 / (r * x0 * x0), -0.9375 / (r * x0 * x0 * x0)});
  all(reciprocal(x), {1 / x0, -1 / (x0 * x0), 2 / std::pow(x0, 3), -6 / std::pow(x0, 4), 24 / std::pow(x0, 5)});
  const double e = 2.0 / 3.0;
  all(pow(x, e), {std::pow(x0, e), e * std::pow(x0, e - 1), e * (e - 1) * std::pow(x0, e - 2),
                  e * (e - 1) * (e - 2) * std::pow(x0, e - 3), e * (e - 1) * (e - 2) * (e - 3) * std::pow(x0, e - 4)});
}

TEST_CASE("division and quotient rule") {
  const Jet s = Jet::variable(2, 3, 0, 1.5);
  const Jet t = Jet::variable(2, 3, 1, -0.5);
  const Jet f = (s * s + t) / (s - t * t);
  const Jet g = f * (s - t * t);
  const Jet h = s * s + t;
  for (std::size_t i = 0; i < g.coefficients().size(); ++i)
    CHECK(g.coefficient(i) == doctest::Approx(h.coefficient(i)).epsilon(1e-13));
}

TEST_CASE("polynomials are exact") {
  const Jet s = Jet::variable(4, 4, 0, 1.25);
  const Jet u = Jet::variable(4, 4, 2, -0.75);
  const Jet f = s * s * s * u - 2.0 * u * u + 3.0;
  CHECK(d(f, {3, 0, 1, 0}) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(d(f, {2, 0, 1, 0}) == doctest::Approx(6 * 1.25).epsilon(1e-12));
  CHECK(d(f, {0, 0, 2, 0}) == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(d(f, {1, 0, 0, 0}) == doctest::Approx(3 * 1.25 * 1.25 * -0.75).epsilon(1e-12));
  CHECK(d(f, {4, 0, 0, 0}) == 0.0);
}

TEST_CASE("Leibniz: product coefficients are the convolution") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 4, k = 1 + trial % 4;
    const Jet f = random_jet(rng, n, k), g = random_jet(rng, n, k);
    const Jet p = f * g;
    std::vector<double> conv(p.coefficients().size(), 0.0);
    for (std::size_t i = 0; i < f.coefficients().size(); ++i) {
      const auto ai = Jet::multi_index(n, i);
      for (std::size_t j = 0; j < g.coefficients().size(); ++j) {
        auto aj = Jet::multi_index(n, j);
        int total = 0;
        for (int v = 0; v < n; ++v) total += (aj[v] += ai[v]);
        if (total > k) continue;
        conv[Jet::index_of(n, aj)] += f.coefficient(i) * g.coefficient(j);
      }
    }
    for (std::size_t i = 0; i < conv.size(); ++i) REQUIRE(p.coefficient(i) == doctest::Approx(conv[i]).epsilon(1e-13));
  }
}

TEST_CASE("derivative lowers the order") {
  const Jet s = Jet::variable(2, 3, 0, 2.0);
  const Jet t = Jet::variable(2, 3, 1, 1.0);
  const Jet f = s * s * t;
  const Jet fs = f.derivative(0);
  CHECK(fs.order() == 2);
  CHECK(fs.value() == doctest::Approx(4.0));
  CHECK(d(fs, {1, 0}) == doctest::Approx(2.0));
  CHECK(d(fs, {1, 1}) == doctest::Approx(2.0));
}

TEST_CASE("mixed orders truncate to the lower") {
  const Jet a = Jet::variable(1, 4, 0, 1.0);
  const Jet b = Jet::variable(1, 2, 0, 1.0);
  CHECK((a * b).order() == 2);
}
