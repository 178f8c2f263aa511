#include <doctest.h>

#include <numbers>

#include "biconserve/errors.hpp"
#include "biconserve/expression.hpp"
#include "biconserve/profile.hpp"

using namespace biconserve;

namespace {

const std::vector<std::string> kVars{"s", "t", "u", "v"};

Expr parse(std::string_view text, std::vector<std::string> profiles = {}) {
  return parse_expression(text, kVars, profiles);
}

double partial(const Jet& j, std::vector<int> a) { return j.partial(a); }

}  // namespace

TEST_CASE("jet_eval: s*t at (2,3,0,0)") {
  const ProfileBank bank;
  const double p[] = {2, 3, 0, 0};
  const Jet j = jet_eval(parse("s*t"), p, 2, bank);
  CHECK(j.value() == doctest::Approx(6));
  CHECK(partial(j, {1, 0, 0, 0}) == doctest::Approx(3));
  CHECK(partial(j, {0, 1, 0, 0}) == doctest::Approx(2));
  CHECK(partial(j, {1, 1, 0, 0}) == doctest::Approx(1));
  CHECK(partial(j, {2, 0, 0, 0}) == 0.0);
  CHECK(partial(j, {0, 2, 0, 0}) == 0.0);
}

TEST_CASE("jet_eval: sinh(v) at v = 0") {
  const ProfileBank bank;
  const double p[] = {0, 0, 0, 0};
  const Jet j = jet_eval(parse("sinh(v)"), p, 3, bank);
  CHECK(j.value() == doctest::Approx(0));
  CHECK(partial(j, {0, 0, 0, 1}) == doctest::Approx(1));
  CHECK(partial(j, {0, 0, 0, 2}) == doctest::Approx(0));
  CHECK(partial(j, {0, 0, 0, 3}) == doctest::Approx(1));
}

TEST_CASE("jet_eval: phi(s)*cos(v) with phi = identity") {
  ProfileBank bank;
  bank.set("phi", ExpressionProfile::parse("s"));
  const double p[] = {1, 0, 0, std::numbers::pi / 2};
  const Expr e = parse("phi(s)*cos(v)", {"phi"});
  const Jet j = jet_eval(e, p, 2, bank);
  CHECK(j.value() == doctest::Approx(0).epsilon(1e-15));
  CHECK(partial(j, {1, 0, 0, 0}) == doctest::Approx(0).epsilon(1e-15));
  CHECK(partial(j, {0, 0, 0, 1}) == doctest::Approx(-1));
  CHECK(partial(j, {1, 0, 0, 1}) == doctest::Approx(-1));
  const int a[] = {1, 0, 0, 1};
  CHECK(fd_partial(e, p, a, 1e-4, bank) == doctest::Approx(-1).epsilon(1e-7));
}

TEST_CASE("division guard names the node") {
  const ProfileBank bank;
  const double p[] = {0, 1, 0, 0};
  try {
    jet_eval(parse("t/s"), p, 1, bank);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("t/s") != std::string::npos);
  }
}

TEST_CASE("fractional power of a non-positive base") {
  const ProfileBank bank;
  const double p[] = {-1, 0, 0, 0};
  CHECK_THROWS_AS(evaluate(parse("s^(2/3)"), p, bank), DomainError);
  CHECK_THROWS_AS(parse("s^t"), ContractViolation);
  CHECK_THROWS_AS(evaluate(parse("s^0.5"), p, bank), DomainError);
  CHECK(evaluate(parse("s^2"), p, bank) == doctest::Approx(1));
  CHECK(evaluate(parse("s^3"), p, bank) == doctest::Approx(-1));
}

TEST_CASE("profile derivative order exceeded") {
  struct Shallow final : Profile {
    std::vector<double> derivatives(double s, int order) const override {
      std::vector<double> d(static_cast<std::size_t>(order) + 1, 0.0);
      d[0] = s;
      if (order >= 1) d[1] = 1;
      return d;
    }
    int max_order() const override { return 1; }
    std::string describe() const override { return "shallow"; }
  };
  ProfileBank bank;
  bank.set("f", std::make_shared<Shallow>());
  const double p[] = {1, 0, 0, 0};
  CHECK_NOTHROW(jet_eval(parse("f(s)", {"f"}), p, 1, bank));
  CHECK_THROWS_AS(jet_eval(parse("f(s)", {"f"}), p, 2, bank), ContractViolation);
}

TEST_CASE("fd_partial oracle values") {
  const ProfileBank bank;
  const double p[] = {0.3, 0, 0, 0};
  const int a2[] = {2, 0, 0, 0};
  CHECK(fd_partial(parse("s^2"), p, a2, 1e-3, bank) == doctest::Approx(2.0).epsilon(1e-6));
  const int av[] = {0, 0, 0, 1};
  CHECK(std::abs(fd_partial(parse("cos(v)"), p, av, 1e-4, bank)) < 1e-7);
  CHECK(default_fd_step(1) == 1e-4);
  CHECK(default_fd_step(2) == 2e-3);
  CHECK(default_fd_step(3) == 5e-3);
}

TEST_CASE("fd_partial surfaces stencil guard violations") {
  const ProfileBank bank;
  const double p[] = {1e-5, 0, 0, 0};
  const int a[] = {1, 0, 0, 0};
  CHECK_THROWS_AS(fd_partial(parse("sqrt(s)"), p, a, 1e-4, bank), DomainError);
}

TEST_CASE("jets agree with the finite-difference oracle up to third order") {
  const ProfileBank bank;
  const Expr e = parse("exp(0.3*s)*sin(t*u) + cosh(v)/(2 + s*s) + sqrt(1 + u^2)*v^3");
  const double p[] = {0.4, -0.7, 0.9, 0.2};
  const Jet j = jet_eval(e, p, 3, bank);
  for (std::size_t i = 1; i < j.coefficients().size(); ++i) {
    const auto alpha = Jet::multi_index(4, i);
    int total = 0;
    for (int k : alpha) total += k;
    const double ad = j.partial(alpha);
    const double fd = fd_oracle(e, p, alpha, bank);
    CHECK(std::abs(ad - fd) <= std::max(1e-5 * std::abs(ad), 1e-7));
    // The plain stencil is second order in h.
    const double raw = fd_partial(e, p, alpha, default_fd_step(total), bank);
    CHECK(std::abs(ad - raw) <= 1e-4 * std::max(1.0, std::abs(ad)));
  }
}

TEST_CASE("parser grammar") {
  const ProfileBank bank;
  const double p[] = {2, 3, 5, 7};
  CHECK(evaluate(parse("1 + 2*3"), p, bank) == 7);
  CHECK(evaluate(parse("-s^2"), p, bank) == -4);
  CHECK(evaluate(parse("(s+t)*(u-v)/2"), p, bank) == -5);
  CHECK(evaluate(parse("2^-1"), p, bank) == 0.5);
  CHECK(evaluate(parse("1.5e1 - .5"), p, bank) == 14.5);
  CHECK(evaluate(parse("cos(pi)"), p, bank) == doctest::Approx(-1));
  CHECK_THROWS_AS(parse("s +"), ContractViolation);
  CHECK_THROWS_AS(parse("w"), ContractViolation);
  CHECK_THROWS_AS(parse("phi(s)"), ContractViolation);
  CHECK_THROWS_AS(parse("(s"), ContractViolation);
}

TEST_CASE("to_string round-trips through the parser") {
  const ProfileBank bank;
  const double p[] = {0.5, -1.25, 2, 0.75};
  for (const char* text : {"s - (t - u)", "s/(t*u)", "-(s + t)^2", "sin(s)*cosh(t - v)/sqrt(2 + u)",
                           "s - -3", "(s^2)^0.5 + exp(-t)"}) {
    const Expr e = parse(text);
    const Expr back = parse(e.to_string());
    CHECK(evaluate(back, p, bank) == doctest::Approx(evaluate(e, p, bank)).epsilon(1e-15));
  }
}
