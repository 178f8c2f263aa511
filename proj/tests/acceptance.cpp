// Acceptance criteria as a standalone program: one [PASS]/[FAIL] line each.
// With no arguments every criterion runs; "acceptance 3 5" runs a subset.
// The exit code is 1 if any selected criterion fails.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "biconserve/catalog.hpp"
#include "biconserve/cli.hpp"
#include "biconserve/errors.hpp"
#include "biconserve/immersion.hpp"
#include "biconserve/profile.hpp"
#include "biconserve/spectral.hpp"

using namespace biconserve;
using Eigen::MatrixXd;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> violated;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      violated.push_back(what);
    }
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CliRun {
  int code;
  json report;
};

CliRun run_verify(std::vector<std::string> args) {
  args.insert(args.begin(), {"biconserve", "verify"});
  args.insert(args.end(), {"--format", "json", "--jobs", "1"});
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code == 2) throw std::runtime_error("verify failed: " + err.str());
  return {code, json::parse(out.str())};
}

const json& check_of(const json& rep, const std::string& name) {
  for (const auto& c : rep["checks"])
    if (c["name"] == name) return c;
  throw std::runtime_error("report has no check " + name);
}

BuiltChart headline_chart() {
  auto spec = parse_family_id("ex41");
  spec.params = {{"a", 1.0}, {"b", 2.0}, {"c", 1.0}};
  spec.solve_psi = true;
  return build(spec);
}

Grid headline_grid() {
  return Grid(ParameterBox({{0.6, 1.4}, {-0.5, 0.5}, {-0.5, 0.5}, {-0.5, 0.5}}), {5, 5, 5, 5});
}

void ac1(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_verify({"ex41", "--a", "1", "--b", "2", "--solve-psi", "--c", "1", "--range",
                             "0.6:1.4,-0.5:0.5,-0.5:0.5,-0.5:0.5", "--grid", "5"});
  const double secs = seconds_since(t0);
  const double bc = check_of(r.report, "biconservative")["max"].get<double>();
  const double pd = check_of(r.report, "principal_direction")["max"].get<double>();
  const auto& hist = r.report["spectral"]["histogram"];
  const int labelled = hist.contains("Case I, 1+1+1+1") ? hist["Case I, 1+1+1+1"].get<int>() : 0;
  o.require(r.report["points"] == 625, "625 points");
  o.require(bc < 1e-6, "biconservative max < 1e-6");
  o.require(pd < 1e-6, "principal-direction max < 1e-6");
  o.require(labelled == 625 && hist.size() == 1, "Case I, 1+1+1+1 at every point");
  o.require(r.code == 0, "exit code 0");
  o.require(secs < 10.0, "runtime < 10 s");
  o.detail << "625 points, biconservative max " << sci(bc) << ", principal-direction max " << sci(pd) << ", "
           << labelled << "/625 Case I, 1+1+1+1, " << sci(secs) << " s";
}

void ac2(Outcome& o) {
  const auto b = headline_chart();
  const auto grid = headline_grid();
  const Profile& psi = b.chart.bank.get("psi");
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto p = grid.point(pick(rng));
    const auto pk = packet(b.chart, p);
    const double s = p[0];
    const auto d = psi.derivatives(s, 2);
    const double w = std::sqrt(2 * d[1] - 1);
    // a = 1, b = 2
    std::vector<double> closed{d[2] / (w * w * w), -1 / (s * w), -1 / ((s + 4) * w), -1 / ((s + 2) * w)};
    Eigen::EigenSolver<MatrixXd> es(pk.S, false);
    std::vector<double> got;
    for (int i = 0; i < 4; ++i) got.push_back(es.eigenvalues()[i].real());
    // The chart's orientation rule may pick the opposite normal; compare up to one global sign.
    double best = 1e300;
    for (double sigma : {1.0, -1.0}) {
      auto c = closed;
      for (auto& x : c) x *= sigma;
      std::sort(c.begin(), c.end());
      std::sort(got.begin(), got.end());
      double rel = 0.0;
      for (int i = 0; i < 4; ++i) rel = std::max(rel, std::abs(got[i] - c[i]) / std::abs(c[i]));
      best = std::min(best, rel);
    }
    worst = std::max(worst, best);
  }
  o.require(worst < 1e-8, "relative error < 1e-8");
  o.detail << "50 grid points, worst relative error " << sci(worst);
}

void ac3(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(7);
  double belt = 0, gauss = 0, cod = 0, norm = 0;
  int charts = 0, bad_index = 0, points = 0;
  for (const auto& e : catalog_entries()) {
    const auto built = build(parse_family_id(e.id));
    const auto& c = built.chart;
    ++charts;
    for (int k = 0; k < 20; ++k) {
      const auto p = c.domain.sample(rng, 0.02);
      const auto r = identity_residuals(c, p);
      belt = std::max(belt, r.beltrami);
      gauss = std::max(gauss, r.gauss);
      cod = std::max(cod, r.codazzi);
      if (c.is_hypersurface()) {
        const auto pk = packet(c, p);
        norm = std::max(norm, std::abs(inner(pk.N, pk.N) - 1.0));
        bad_index += pk.metric_index != 2;
      } else {
        bad_index += fundamental_forms(c, p).metric_index != e.expected_index;
      }
      ++points;
    }
  }
  const double secs = seconds_since(t0);
  o.require(belt < 1e-7, "Beltrami < 1e-7");
  o.require(gauss < 1e-6, "Gauss < 1e-6");
  o.require(cod < 1e-6, "Codazzi < 1e-6");
  o.require(norm < 1e-9, "|<N,N> - 1| < 1e-9");
  o.require(bad_index == 0, "induced index as expected");
  o.require(secs < 60.0, "runtime < 60 s");
  o.detail << charts << " charts, " << points << " points: Beltrami " << sci(belt) << ", Gauss " << sci(gauss)
           << ", Codazzi " << sci(cod) << ", |<N,N>-1| " << sci(norm) << ", index mismatches " << bad_index << ", "
           << sci(secs) << " s";
}

void ac4(Outcome& o) {
  const auto r = run_verify({"ex41", "--a", "1", "--b", "2", "--psi", "s^2"});
  const double bc = check_of(r.report, "biconservative")["max"].get<double>();
  o.require(bc > 1e-3, "biconservative max > 1e-3");
  o.require(r.code == 1, "exit code 1");
  o.detail << "psi = s^2: biconservative max " << sci(bc) << ", exit code " << r.code;
}

// Canonical forms of the shape operator with separated eigenvalues, then a
// random well-conditioned change of frame.
MatrixXd jordan_metric() {
  MatrixXd g = MatrixXd::Zero(4, 4);
  g(0, 0) = 1;
  g(1, 2) = g(2, 1) = -1;
  g(3, 3) = -1;
  return g;
}

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

MatrixXd random_frame(std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  std::uniform_real_distribution<double> D(0.5, 2.0);
  MatrixXd A(4, 4);
  for (int i = 0; i < 16; ++i) A.data()[i] = N(rng);
  Eigen::HouseholderQR<MatrixXd> qr(A);
  const MatrixXd Q = qr.householderQ();
  Eigen::Vector4d d;
  for (int i = 0; i < 4; ++i) d[i] = D(rng);
  return Q * d.asDiagonal();
}

void ac5(Outcome& o) {
  std::mt19937_64 rng(2024);
  for (ShapeCase which : {ShapeCase::I, ShapeCase::II, ShapeCase::III}) {
    int correct = 0, unresolved = 0, wrong = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      MatrixXd S0 = MatrixXd::Zero(4, 4), G0;
      std::vector<double> real;
      ComplexPair pair{};
      if (which == ShapeCase::I) {
        const auto v = separated(rng, 4);
        auto perm = v;
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int i = 0; i < 4; ++i) S0(i, i) = perm[i];
        G0 = Eigen::Vector4d(-1, -1, 1, 1).asDiagonal();
        real = v;
      } else if (which == ShapeCase::II) {
        const auto v = separated(rng, 3);
        S0(0, 0) = v[0];
        S0(1, 1) = S0(2, 2) = v[1];
        S0(1, 2) = 1;
        S0(3, 3) = v[2];
        G0 = jordan_metric();
        real = {v[0], v[1], v[1], v[2]};
      } else {
        const auto v = separated(rng, 3);
        const double nu = std::uniform_real_distribution<double>(0.2, 2.0)(rng);
        S0(0, 0) = v[0];
        S0(1, 1) = S0(2, 2) = v[1];
        S0(1, 2) = -nu;
        S0(2, 1) = nu;
        S0(3, 3) = v[2];
        G0 = Eigen::Vector4d(1, -1, 1, -1).asDiagonal();
        real = {v[0], v[2]};
        pair = {v[1], nu};
      }
      const MatrixXd P = random_frame(rng);
      const auto sp = eigen_structure(P.inverse() * S0 * P, P.transpose() * G0 * P);
      if (sp.case_label == ShapeCase::Unresolved) {
        ++unresolved;
        continue;
      }
      if (sp.case_label != which) {
        ++wrong;
        continue;
      }
      ++correct;
      const auto got = sp.expanded();
      if (got.size() != real.size()) {
        worst = 1e300;
        continue;
      }
      for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - real[i]));
      if (which == ShapeCase::III) {
        worst = std::max(worst, std::abs(sp.complex_pairs[0].re - pair.re));
        worst = std::max(worst, std::abs(sp.complex_pairs[0].im - pair.im));
      }
    }
    const std::string name = "Case " + to_string(which);
    o.require(correct >= 999, name + " correct >= 999");
    o.require(wrong == 0, name + " never a wrong label");
    o.require(worst < 1e-8, name + " eigenvalues to 1e-8");
    o.detail << name << " " << correct << "/1000 (unresolved " << unresolved << ", wrong " << wrong << ", max error "
             << sci(worst) << ") ";
  }
}

void ac6(Outcome& o) {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  int charts = 0, skipped = 0;
  std::string worst_id;
  for (const auto& e : catalog_entries()) {
    const auto built = build(parse_family_id(e.id));
    const auto& c = built.chart;
    if (!c.is_hypersurface()) {
      ++skipped;
      continue;
    }
    ++charts;
    for (int k = 0; k < 50; ++k) {
      const auto p = c.domain.sample(rng, 0.02);
      const auto ad = packet(c, p);
      const auto fd = packet_fd(c, p);
      // relative to the largest entry, with an absolute floor for vanishing S
      const double scale = ad.S.cwiseAbs().maxCoeff();
      const double err = (ad.S - fd.S).cwiseAbs().maxCoeff() / (1e-5 * scale + 1e-7);
      if (err > worst) {
        worst = err;
        worst_id = e.id;
      }
    }
  }
  o.require(worst <= 1.0, "|S_ad - S_fd| <= 1e-5 |S|_max + 1e-7");
  o.detail << charts << " hypersurface charts x 50 points, worst error " << sci(worst)
           << " of tolerance (" << worst_id << "); " << skipped << " reduced charts have no shape operator";
}

void ac7(Outcome& o) {
  const auto psi = solve_psi(1, 2, 1, {0.5, 2.0});
  const double offsets[] = {0.0, 2.0, 4.0};
  double ode = 0.0;
  for (int i = 0; i <= 300; ++i) ode = std::max(ode, psi_ode_residual(*psi, 1, 2, 0.5 + 1.5 * i / 300.0));

  // (psi, psi') as a first-order system, classical RK4 from the values at s = 0.5
  using State = std::array<double, 2>;
  auto rhs = [&](const State& y, State& dy, double s) {
    double sum = 0.0;
    for (double off : offsets) sum += 1.0 / (s + off);
    dy[0] = y[1];
    dy[1] = (2.0 * y[1] - 1.0) * sum / 3.0;
  };
  boost::numeric::odeint::runge_kutta4<State> stepper;
  const auto d0 = psi->derivatives(0.5, 1);
  State y{d0[0], d0[1]};
  double s = 0.5, diff = 0.0;
  const double h = 1e-3;
  for (int i = 1; i <= 1500; ++i) {
    stepper.do_step(rhs, y, s, h);
    s = 0.5 + i * h;
    if (i % 10 == 0) {
      const auto d = psi->derivatives(s, 1);
      diff = std::max({diff, std::abs(y[0] - d[0]) / std::max(1.0, std::abs(d[0])),
                       std::abs(y[1] - d[1]) / std::max(1.0, std::abs(d[1]))});
    }
  }
  o.require(ode < 1e-9, "ODE residual < 1e-9");
  o.require(diff < 1e-7, "RK4 agreement < 1e-7");
  o.detail << "ODE residual " << sci(ode) << " on 301 points, RK4 difference " << sci(diff) << " on s in [0.5, 2]";
}

void ac8(Outcome& o) {
  const auto distinct = build_remark42(4, {1, 2, 3});
  std::mt19937_64 rng(1);
  double min_ratio = 1e300;
  int five = 0;
  for (int k = 0; k < 50; ++k) {
    const auto p = distinct.chart.domain.sample(rng, 0.02);
    const auto pk = packet(distinct.chart, p);
    const auto sp = eigen_structure(pk.S, pk.G);
    const auto e = sp.expanded();
    if (sp.real_eigenvalues.size() != 5) continue;
    ++five;
    for (int i = 1; i < 5; ++i) min_ratio = std::min(min_ratio, (e[i] - e[i - 1]) / sp.clustering_tol);
  }
  o.require(five == 50, "5 distinct curvatures at every sample");
  o.require(min_ratio > 10.0, "gaps > 10 clustering tol");

  int collapsed = 0;
  double pair_gap = 0.0;
  for (const std::vector<double>& offs : {std::vector<double>{1, 1, 3}, std::vector<double>{1, 2, 2}}) {
    const auto b = build_remark42(4, offs);
    for (int k = 0; k < 25; ++k) {
      const auto p = b.chart.domain.sample(rng, 0.02);
      const auto pk = packet(b.chart, p);
      const auto sp = eigen_structure(pk.S, pk.G);
      Eigen::EigenSolver<MatrixXd> es(pk.S, false);
      std::vector<double> raw;
      for (int i = 0; i < 5; ++i) raw.push_back(es.eigenvalues()[i].real());
      std::sort(raw.begin(), raw.end());
      double closest = 1e300;
      for (int i = 1; i < 5; ++i) closest = std::min(closest, raw[i] - raw[i - 1]);
      pair_gap = std::max(pair_gap, closest / sp.clustering_tol);
      collapsed += multiplicity_pattern(sp) == "1+2+1+1";
    }
  }
  o.require(collapsed == 50, "equal offsets give 1+2+1+1");
  o.require(pair_gap <= 1.0, "collapsed pair within tol");
  o.detail << "offsets (1,2,3): " << five << "/50 with 5 distinct, smallest gap " << sci(min_ratio)
           << " tol; offsets (1,1,3) and (1,2,2): " << collapsed << "/50 collapsed, pair gap at most " << sci(pair_gap)
           << " tol";
}

struct Criterion {
  int id;
  const char* title;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "headline sweep of the four-curvature example", ac1},
      {2, "principal curvatures against their closed forms", ac2},
      {3, "identity suite over the catalog", ac3},
      {4, "negative control psi = s^2", ac4},
      {5, "planted canonical forms", ac5},
      {6, "shape operator from jets against finite differences", ac6},
      {7, "solved psi against its ODE and RK4", ac7},
      {8, "extension to five curvatures", ac8},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "error: " << e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << "AC" << c.id << " " << c.title << ": " << o.detail.str();
    for (std::size_t i = 0; i < o.violated.size(); ++i) std::cout << (i ? ", " : " | violated: ") << o.violated[i];
    std::cout << std::endl;
  }
  return failed ? 1 : 0;
}
