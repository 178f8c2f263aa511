#include "biconserve/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "biconserve/errors.hpp"
#include "biconserve/immersion.hpp"
#include "biconserve/spectral.hpp"

namespace biconserve::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const char* const kNotAsserted = "not asserted (profile not biconservative-solved)";
const char* const kVacuous = "vacuous (constant mean curvature)";

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s) {
  double x = 0.0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) throw ContractViolation("not a number: '" + s + "'");
  return x;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& f : split(s, ',')) out.push_back(parse_double(f));
  return out;
}

std::vector<Interval> parse_ranges(const std::string& s) {
  std::vector<Interval> out;
  for (const auto& f : split(s, ',')) {
    const auto colon = f.find(':');
    if (colon == std::string::npos) throw ContractViolation("range '" + f + "' is not lo:hi");
    out.push_back({parse_double(f.substr(0, colon)), parse_double(f.substr(colon + 1))});
  }
  return out;
}

bool is_catalog_target(const std::string& t) { return t != "inline"; }

bool needs_hypersurface(const std::string& check) {
  return check == "biconservative" || check == "principal_direction" || check == "structure";
}

std::map<std::string, double> default_tolerances(const std::string& oracle) {
  const double bc = oracle == "fd" ? 1e-4 : 1e-6;
  return {{"biconservative", bc}, {"principal_direction", bc}, {"beltrami", 1e-7},
          {"gauss_codazzi", 1e-7}, {"spectral", kDefaultSpectralTolerance}, {"cmc", Tolerances{}.cmc}};
}

// Runs f(0..n-1) on `jobs` threads. The first failure in index order is
// rethrown, so errors do not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, int jobs, F f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = static_cast<int>(std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<double> curvatures(const ShapeSpectrum& sp) {
  auto k = sp.expanded();
  for (const auto& c : sp.complex_pairs) k.insert(k.end(), 2, c.re);
  std::sort(k.begin(), k.end());
  return k;
}

Tolerances kernel_tolerances(const std::map<std::string, double>& tol) {
  Tolerances t;
  t.cmc = tol.at("cmc");
  return t;
}

PointRow evaluate_point(const BuiltChart& built, const VerifyRequest& req, const std::vector<double>& p) {
  const auto& chart = built.chart;
  const auto tol = kernel_tolerances(req.tolerances);
  PointRow row;
  row.point = p;
  const auto id = identity_residuals(chart, p, tol);
  row.residuals["beltrami"] = id.beltrami;
  row.residuals["gauss_codazzi"] = std::max(id.gauss, id.codazzi);
  if (!chart.is_hypersurface()) return row;
  const auto pk = req.oracle == "fd" ? packet_fd(chart, p, nullptr, tol) : packet(chart, p, nullptr, tol);
  row.H = pk.H;
  row.cmc = pk.cmc;
  row.residuals["biconservative"] = pk.cmc ? kNaN : biconservative_residual(pk);
  row.residuals["principal_direction"] = principal_direction_check(pk).value_or(kNaN);
  const auto sp = eigen_structure(pk.S, pk.G, req.tolerances.at("spectral"));
  row.k = curvatures(sp);
  row.label = to_string(sp.case_label);
  row.pattern = multiplicity_pattern(sp);
  row.pattern_ok = is_catalog_target(req.target) ? family_pattern_matches(built.spec.family, sp, chart.dim())
                                                 : sp.case_label != ShapeCase::Unresolved;
  row.residuals["structure"] = row.pattern_ok ? 0.0 : 1.0;
  return row;
}

std::string histogram_key(const PointRow& r) {
  return r.label == "unresolved" ? "unresolved" : "Case " + r.label + ", " + r.pattern;
}

[[noreturn]] void rethrow_with_target(const std::string& target, const GeometryError& e) {
  const std::string msg = e.what();
  if (msg.rfind(target, 0) == 0) throw;
  throw GeometryError(target + ": " + msg);
}

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {"biconservative", "principal_direction", "beltrami", "gauss_codazzi",
                                                 "structure"};
  return names;
}

json to_json(const VerifyRequest& req) {
  json j;
  j["target"] = req.target;
  j["params"] = req.spec.params;
  j["offsets"] = req.spec.offsets;
  j["profiles"] = req.spec.profiles;
  j["solve_psi"] = req.spec.solve_psi;
  j["theta"] = req.spec.theta;
  j["s0"] = req.spec.s0;
  j["phi0"] = req.spec.phi0;
  j["psi0"] = req.spec.psi0 ? json(*req.spec.psi0) : json(nullptr);
  if (!req.chart.empty()) {
    j["chart"] = req.chart;
    j["axes"] = req.axes;
  }
  j["grid"] = req.nodes;
  json r = json::array();
  for (const auto& i : req.range) r.push_back(interval_json(i));
  j["range"] = r;
  j["random_points"] = req.random_points;
  j["seed"] = req.seed;
  j["checks"] = req.checks;
  j["tolerances"] = req.tolerances;
  j["oracle"] = req.oracle;
  j["assert_biconservative"] = req.assert_biconservative ? json(*req.assert_biconservative) : json(nullptr);
  j["rows"] = req.rows;
  return j;
}

VerifyRequest request_from_json(const json& j) {
  VerifyRequest req;
  req.target = j.at("target").get<std::string>();
  if (is_catalog_target(req.target)) req.spec = parse_family_id(req.target);
  if (j.contains("params"))
    for (const auto& [k, v] : j["params"].items()) req.spec.params[k] = v.get<double>();
  if (j.contains("offsets")) req.spec.offsets = j["offsets"].get<std::vector<double>>();
  if (j.contains("profiles")) req.spec.profiles = j["profiles"].get<std::map<std::string, std::string>>();
  if (j.contains("solve_psi")) req.spec.solve_psi = j["solve_psi"].get<bool>();
  if (j.contains("theta")) req.spec.theta = j["theta"].get<std::string>();
  if (j.contains("s0")) req.spec.s0 = j["s0"].get<double>();
  if (j.contains("phi0")) req.spec.phi0 = j["phi0"].get<double>();
  if (j.contains("psi0") && !j["psi0"].is_null()) req.spec.psi0 = j["psi0"].get<double>();
  if (j.contains("chart")) req.chart = j["chart"].get<std::vector<std::string>>();
  if (j.contains("axes")) req.axes = j["axes"].get<std::vector<std::string>>();
  if (j.contains("grid")) req.nodes = j["grid"].get<std::vector<int>>();
  if (j.contains("range"))
    for (const auto& r : j["range"]) req.range.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
  if (j.contains("random_points")) req.random_points = j["random_points"].get<int>();
  if (j.contains("seed")) req.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("checks")) req.checks = j["checks"].get<std::vector<std::string>>();
  if (j.contains("tolerances")) req.tolerances = j["tolerances"].get<std::map<std::string, double>>();
  if (j.contains("oracle")) req.oracle = j["oracle"].get<std::string>();
  if (j.contains("assert_biconservative") && !j["assert_biconservative"].is_null())
    req.assert_biconservative = j["assert_biconservative"].get<bool>();
  if (j.contains("rows")) req.rows = j["rows"].get<bool>();
  return req;
}

BuiltChart build_target(const VerifyRequest& req) {
  try {
    if (is_catalog_target(req.target)) return build(req.spec);
    if (req.chart.empty()) throw ContractViolation("inline target needs --chart");
    BuiltChart out;
    auto& c = out.chart;
    c.id = "inline";
    c.param_names = req.axes;
    if (c.param_names.empty()) {
      const std::vector<std::string> names = {"s", "t", "u", "v"};
      if (req.chart.size() < 2 || req.chart.size() > names.size() + 1)
        throw ContractViolation("inline chart: give --axes for " + std::to_string(req.chart.size()) + " components");
      c.param_names.assign(names.begin(), names.begin() + static_cast<long>(req.chart.size() - 1));
    }
    std::string note;
    for (const auto& [name, text] : req.spec.profiles) {
      if (text.rfind("auto", 0) == 0) throw ContractViolation("inline chart: profile '" + name + "' must be an expression");
      c.bank.set(name, ExpressionProfile::parse(text));
      note += (note.empty() ? "" : ", ") + name + " = " + text;
    }
    const auto pnames = c.bank.names();
    for (const auto& e : req.chart) c.components.push_back(parse_expression(e, c.param_names, pnames));
    std::vector<Interval> dom = req.range;
    if (dom.empty()) {
      dom.assign(c.param_names.size(), Interval{-0.5, 0.5});
      dom[0] = {0.5, 1.5};
    }
    if (dom.size() != c.param_names.size()) throw ContractViolation("inline chart: range has the wrong number of axes");
    c.domain = ParameterBox(dom);
    c.signature = Signature(static_cast<int>(req.chart.size()), 2);
    c.expected_index = 2;
    c.validate();
    out.profile_note = note;
    return out;
  } catch (const GeometryError& e) {
    rethrow_with_target(req.target, e);
  }
}

VerifyRequest resolve(const VerifyRequest& req, const BuiltChart& built) {
  VerifyRequest r = req;
  const auto& chart = built.chart;
  const auto d = static_cast<std::size_t>(chart.dim());
  if (r.oracle != "ad" && r.oracle != "fd") throw ContractViolation("oracle must be 'ad' or 'fd'");
  if (r.random_points < 0) throw ContractViolation("--random-points must be positive");
  if (r.random_points == 0) {
    if (r.nodes.empty()) r.nodes = {5};
    if (r.nodes.size() == 1) r.nodes.assign(d, r.nodes[0]);
    if (r.nodes.size() != d) throw ContractViolation("grid has " + std::to_string(r.nodes.size()) + " axes, chart has " + std::to_string(d));
    for (int n : r.nodes)
      if (n < 2) throw ContractViolation("grid needs at least 2 nodes per axis");
  } else {
    r.nodes.clear();
  }
  if (r.range.empty()) r.range.assign(chart.domain.axes().begin(), chart.domain.axes().end());
  if (r.range.size() != d) throw ContractViolation("range has " + std::to_string(r.range.size()) + " axes, chart has " + std::to_string(d));
  for (std::size_t i = 0; i < d; ++i) {
    const auto& a = r.range[i];
    const auto& dom = chart.domain.axis(i);
    const double slack = 1e-12 * (1.0 + std::abs(dom.lo) + std::abs(dom.hi));
    if (!(a.lo <= a.hi) || a.lo < dom.lo - slack || a.hi > dom.hi + slack)
      throw ContractViolation("range for " + chart.param_names[i] + " [" + format_number(a.lo) + ", " + format_number(a.hi) +
                              "] is not inside the chart domain [" + format_number(dom.lo) + ", " + format_number(dom.hi) + "]");
  }
  if (r.checks.empty()) {
    for (const auto& c : check_names())
      if (chart.is_hypersurface() || !needs_hypersurface(c)) r.checks.push_back(c);
  }
  for (const auto& c : r.checks) {
    if (std::find(check_names().begin(), check_names().end(), c) == check_names().end())
      throw ContractViolation("unknown check '" + c + "'");
    if (needs_hypersurface(c) && !chart.is_hypersurface())
      throw ContractViolation("check '" + c + "' needs a hypersurface chart");
  }
  auto tol = default_tolerances(r.oracle);
  for (const auto& [k, v] : r.tolerances) {
    if (!tol.count(k)) throw ContractViolation("unknown tolerance '" + k + "'");
    if (!(v > 0)) throw ContractViolation("tolerance '" + k + "' must be positive");
    tol[k] = v;
  }
  r.tolerances = tol;
  if (!r.assert_biconservative) r.assert_biconservative = built.asserts_biconservative;
  return r;
}

std::vector<std::vector<double>> sample_points(const VerifyRequest& r, const BuiltChart&) {
  const ParameterBox box(r.range);
  std::vector<std::vector<double>> pts;
  if (r.random_points > 0) {
    std::mt19937_64 rng(r.seed);
    for (int i = 0; i < r.random_points; ++i) pts.push_back(box.sample(rng));
    return pts;
  }
  const Grid grid(box, r.nodes);
  for (std::size_t k = 0; k < grid.size(); ++k) pts.push_back(grid.point(k));
  return pts;
}

namespace {

std::vector<PointRow> evaluate_all(const VerifyRequest& r, const BuiltChart& built) {
  const auto pts = sample_points(r, built);
  std::vector<PointRow> rows(pts.size());
  try {
    parallel_for(pts.size(), r.jobs, [&](std::size_t i) { rows[i] = evaluate_point(built, r, pts[i]); });
  } catch (const GeometryError& e) {
    rethrow_with_target(r.target, e);
  }
  return rows;
}

}  // namespace

ResidualReport cmd_verify(const VerifyRequest& req) {
  const auto built = build_target(req);
  VerifyRequest r;
  try {
    r = resolve(req, built);
  } catch (const GeometryError& e) {
    rethrow_with_target(req.target, e);
  }
  auto rows = evaluate_all(r, built);

  ResidualReport rep;
  rep.target = r.target;
  rep.config = to_json(r);
  rep.points = static_cast<int>(rows.size());
  const bool asserted_bc = *r.assert_biconservative;
  int cmc_points = 0;
  for (const auto& row : rows) cmc_points += row.cmc;

  for (const auto& name : r.checks) {
    CheckSummary c;
    c.name = name;
    c.tolerance = name == "structure" ? 0.0 : r.tolerances.at(name);
    double sum = 0.0;
    for (const auto& row : rows) {
      const double v = row.residuals.at(name);
      if (std::isnan(v)) continue;
      if (c.evaluated == 0 || v > c.max) {
        c.max = v;
        c.argmax = row.point;
      }
      sum += v;
      ++c.evaluated;
    }
    c.mean = c.evaluated ? sum / c.evaluated : 0.0;
    c.asserted = !(name == "biconservative" || name == "principal_direction") || asserted_bc;
    if (!c.asserted) c.status = kNotAsserted;
    else if (c.evaluated == 0) c.status = kVacuous;
    else c.status = c.max <= c.tolerance ? "pass" : "fail";
    rep.passed = rep.passed && !c.failed();
    rep.checks.push_back(std::move(c));
  }

  if (built.chart.is_hypersurface()) {
    const std::size_t n = rows.empty() ? 0 : rows.front().k.size();
    rep.curvature_ranges.assign(n, Interval{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    for (const auto& row : rows) {
      ++rep.label_histogram[histogram_key(row)];
      for (std::size_t i = 0; i < n; ++i) {
        rep.curvature_ranges[i].lo = std::min(rep.curvature_ranges[i].lo, row.k[i]);
        rep.curvature_ranges[i].hi = std::max(rep.curvature_ranges[i].hi, row.k[i]);
      }
    }
  }
  if (!built.profile_note.empty()) rep.notes.push_back(built.profile_note);
  if (built.chart.is_hypersurface() && cmc_points == rep.points && rep.points > 0)
    rep.notes.push_back("constant mean curvature on every sample; the biconservative condition holds vacuously");
  else if (cmc_points > 0)
    rep.notes.push_back(std::to_string(cmc_points) + " samples with constant mean curvature skipped by the biconservative checks");
  if (req.assert_biconservative && *req.assert_biconservative != built.asserts_biconservative)
    rep.notes.push_back(std::string("biconservative assertion overridden to ") + (*req.assert_biconservative ? "on" : "off"));
  if (r.rows) rep.rows = std::move(rows);
  return rep;
}

int exit_code(const ResidualReport& rep) { return rep.passed ? 0 : 1; }

json to_json(const ResidualReport& rep) {
  json j;
  j["schema"] = kSchema;
  j["tool"] = "biconserve";
  j["version"] = kVersion;
  j["target"] = rep.target;
  j["config"] = rep.config;
  j["points"] = rep.points;
  j["passed"] = rep.passed;
  j["exit_code"] = exit_code(rep);
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name},
                      {"status", c.status},
                      {"asserted", c.asserted},
                      {"max", c.max},
                      {"mean", c.mean},
                      {"argmax", c.argmax},
                      {"tolerance", c.tolerance},
                      {"evaluated", c.evaluated}});
  j["checks"] = checks;
  json ranges = json::array();
  for (const auto& i : rep.curvature_ranges) ranges.push_back(interval_json(i));
  j["spectral"] = {{"histogram", rep.label_histogram}, {"curvature_ranges", ranges}};
  j["notes"] = rep.notes;
  if (!rep.rows.empty()) {
    json rows = json::array();
    for (const auto& r : rep.rows) {
      json res = json::object();
      for (const auto& [k, v] : r.residuals) res[k] = std::isnan(v) ? json(nullptr) : json(v);
      rows.push_back({{"point", r.point}, {"H", r.H}, {"k", r.k}, {"label", r.label}, {"pattern", r.pattern}, {"residuals", res}});
    }
    j["rows"] = rows;
  }
  return j;
}

std::string report_csv(const ResidualReport& rep) {
  std::string out = "check,status,asserted,max,mean,argmax,tolerance,evaluated\n";
  for (const auto& c : rep.checks) {
    std::string arg;
    for (double x : c.argmax) arg += (arg.empty() ? "" : " ") + format_number(x);
    out += csv_field(c.name) + "," + csv_field(c.status) + "," + (c.asserted ? "true" : "false") + "," +
           format_number(c.max) + "," + format_number(c.mean) + "," + csv_field(arg) + "," + format_number(c.tolerance) +
           "," + std::to_string(c.evaluated) + "\n";
  }
  return out;
}

std::string report_text(const ResidualReport& rep) {
  std::ostringstream o;
  o << rep.target << ": " << rep.points << " points\n";
  for (const auto& c : rep.checks) {
    o << "  " << c.name << std::string(c.name.size() < 20 ? 20 - c.name.size() : 1, ' ') << c.status;
    if (c.evaluated) o << "  max " << format_number(c.max) << "  mean " << format_number(c.mean);
    if (c.asserted && c.name != "structure") o << "  tol " << format_number(c.tolerance);
    o << "\n";
  }
  for (const auto& [k, v] : rep.label_histogram) o << "  spectrum " << k << ": " << v << " points\n";
  for (const auto& n : rep.notes) o << "  note: " << n << "\n";
  o << (rep.passed ? "PASS" : "FAIL") << "\n";
  return o.str();
}

std::vector<std::string> sample_columns(const BuiltChart& built) {
  auto cols = built.chart.param_names;
  if (built.chart.is_hypersurface()) {
    cols.push_back("H");
    for (int i = 1; i <= built.chart.dim(); ++i) cols.push_back("k" + std::to_string(i));
    cols.insert(cols.end(), {"label", "pattern"});
  }
  for (const auto& c : check_names())
    if (built.chart.is_hypersurface() || !needs_hypersurface(c)) cols.push_back(c);
  return cols;
}

std::vector<std::string> default_sample_columns(const BuiltChart& built) {
  auto cols = sample_columns(built);
  cols.erase(std::remove_if(cols.begin(), cols.end(), [](const std::string& c) { return c == "label" || c == "pattern" || c == "structure"; }),
             cols.end());
  return cols;
}

std::string cmd_sample(const VerifyRequest& req, const std::vector<std::string>& columns) {
  const auto built = build_target(req);
  VerifyRequest r;
  try {
    r = resolve(req, built);
  } catch (const GeometryError& e) {
    rethrow_with_target(req.target, e);
  }
  const auto cols = columns.empty() ? default_sample_columns(built) : columns;
  const auto avail = sample_columns(built);
  for (const auto& c : cols)
    if (std::find(avail.begin(), avail.end(), c) == avail.end())
      throw ContractViolation(req.target + ": unknown column '" + c + "'");
  const auto rows = evaluate_all(r, built);
  const auto& names = built.chart.param_names;
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + csv_field(cols[i]);
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto& c = cols[i];
      std::string v;
      const auto axis = std::find(names.begin(), names.end(), c);
      if (axis != names.end()) v = format_number(row.point[static_cast<std::size_t>(axis - names.begin())]);
      else if (c == "H") v = format_number(row.H);
      else if (c == "label") v = row.label;
      else if (c == "pattern") v = row.pattern;
      else if (c[0] == 'k' && !row.residuals.count(c)) v = format_number(row.k[std::stoul(c.substr(1)) - 1]);
      else v = format_number(row.residuals.at(c));
      out += (i ? "," : "") + csv_field(v);
    }
    out += "\n";
  }
  return out;
}

std::string case_line(const ShapeSpectrum& sp) {
  if (sp.case_label == ShapeCase::Unresolved) return "unresolved";
  const auto pattern = multiplicity_pattern(sp);
  const bool distinct = sp.complex_pairs.empty() && static_cast<int>(sp.real_eigenvalues.size()) == sp.n;
  return "Case " + to_string(sp.case_label) + ", " + (distinct ? std::to_string(sp.n) + " distinct" : pattern);
}

namespace {

// Flags shared by verify, classify and sample.
struct SpecFlags {
  double a = 0, b = 0, c = 0, r = 0, A = 0, R = 0, s0 = 0, phi0 = 0, psi0 = 0;
  int n = 0;
  std::string offsets, phi, psi, phi1, phi2, theta, chart, axes;
  bool solve_psi = false;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app) {
    opts["a"] = app->add_option("--a", a, "parameter a");
    opts["b"] = app->add_option("--b", b, "parameter b");
    opts["c"] = app->add_option("--c", c, "constant c of the solved psi");
    opts["r"] = app->add_option("--r", r, "radius r");
    opts["A"] = app->add_option("--A", A, "coefficient A");
    opts["R"] = app->add_option("--R", R, "curve radius R");
    opts["n"] = app->add_option("--n", n, "rem42: number of t axes (dimension n + 1)");
    opts["offsets"] = app->add_option("--offsets", offsets, "rem42: offsets a_1,...,a_{n-1}");
    opts["phi"] = app->add_option("--phi", phi, "profile phi(s): expression or auto, auto-sum1, auto-diffP, auto-diffM");
    opts["psi"] = app->add_option("--psi", psi, "profile psi(s)");
    opts["phi1"] = app->add_option("--phi1", phi1, "profile phi1(s)");
    opts["phi2"] = app->add_option("--phi2", phi2, "profile phi2(s)");
    opts["theta"] = app->add_option("--theta", theta, "angle function for auto profiles");
    opts["s0"] = app->add_option("--s0", s0, "base point of auto profiles");
    opts["phi0"] = app->add_option("--phi0", phi0, "first profile at s0");
    opts["psi0"] = app->add_option("--psi0", psi0, "second profile at s0");
    opts["chart"] = app->add_option("--chart", chart, "inline chart: comma-separated components");
    opts["axes"] = app->add_option("--axes", axes, "inline chart: parameter names");
    app->add_flag("--solve-psi", solve_psi, "solve the biconservative ODE for psi");
  }
  bool given(const std::string& k) const { return opts.at(k)->count() > 0; }

  void apply(VerifyRequest& req) const {
    auto& s = req.spec;
    for (const auto& [k, v] : std::map<std::string, double>{{"a", a}, {"b", b}, {"c", c}, {"r", r}, {"A", A}, {"R", R}})
      if (given(k)) s.params[k] = v;
    if (given("n")) {
      s.params["n"] = n;
      if (!given("offsets") && s.family == Family::REM42) {
        s.offsets.clear();
        for (int i = 1; i < n; ++i) s.offsets.push_back(i);
      }
    }
    if (given("offsets")) s.offsets = parse_doubles(offsets);
    for (const auto& [k, v] : std::map<std::string, std::string>{{"phi", phi}, {"psi", psi}, {"phi1", phi1}, {"phi2", phi2}})
      if (given(k)) s.profiles[k] = v;
    if (given("theta")) s.theta = theta;
    if (given("s0")) s.s0 = s0;
    if (given("phi0")) s.phi0 = phi0;
    if (given("psi0")) s.psi0 = psi0;
    if (solve_psi) s.solve_psi = true;
    if (given("chart")) req.chart = split(chart, ',');
    if (given("axes")) req.axes = split(axes, ',');
  }
};

struct SweepFlags {
  std::string grid, range, checks, config, oracle, format = "text", output;
  std::vector<std::string> tol;
  int random_points = 0;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool assert_bc = false, rows = false;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, bool verify) {
    opts["grid"] = app->add_option("--grid", grid, "nodes per axis: N or N1,N2,...");
    opts["range"] = app->add_option("--range", range, "sampling box: lo:hi,lo:hi,... (use --range=... for negative lo)");
    opts["random"] = app->add_option("--random-points", random_points, "seeded uniform samples instead of the grid");
    opts["seed"] = app->add_option("--seed", seed, "seed for --random-points");
    opts["oracle"] = app->add_option("--oracle", oracle, "ad (jets) or fd (finite differences)")->check(CLI::IsMember({"ad", "fd"}));
    opts["tol"] = app->add_option("--tol", tol, "tolerance override name=value (repeatable)")
                      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    opts["config"] = app->add_option("--config", config, "JSON request or report; flags override it");
    opts["jobs"] = app->add_option("--jobs", jobs, "worker threads (default $BICONSERVE_JOBS or 1)");
    opts["output"] = app->add_option("--output", output, "write to this file instead of stdout");
    if (verify) {
      opts["checks"] = app->add_option("--checks", checks, "comma-separated subset of checks");
      opts["format"] = app->add_option("--format", format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
      app->add_flag("--assert-biconservative", assert_bc, "treat the biconservative checks as claims");
      app->add_flag("--rows", rows, "include per-point rows in the JSON report");
    }
  }
  bool given(const std::string& k) const { return opts.count(k) && opts.at(k)->count() > 0; }
};

VerifyRequest make_request(const std::string& target, const SpecFlags& sf, const SweepFlags& wf) {
  VerifyRequest req;
  if (wf.given("config")) {
    std::ifstream in(wf.config);
    if (!in) throw ContractViolation("cannot read config '" + wf.config + "'");
    const json j = json::parse(in);
    req = request_from_json(j.contains("config") ? j["config"] : j);
  }
  if (!target.empty() && target != req.target) {
    const auto keep = req;
    req = VerifyRequest{};
    req.target = target;
    if (is_catalog_target(target)) req.spec = parse_family_id(target);
    if (!keep.target.empty()) {
      req.nodes = keep.nodes;
      req.checks = keep.checks;
      req.tolerances = keep.tolerances;
      req.oracle = keep.oracle;
    }
  }
  if (req.target.empty()) throw ContractViolation("no target: give a catalog id, 'inline' or --config");
  sf.apply(req);
  if (wf.given("grid")) {
    req.nodes.clear();
    for (double x : parse_doubles(wf.grid)) req.nodes.push_back(static_cast<int>(x));
  }
  if (wf.given("range")) req.range = parse_ranges(wf.range);
  if (wf.given("random")) req.random_points = wf.random_points;
  if (wf.given("seed")) req.seed = wf.seed;
  if (wf.given("oracle")) req.oracle = wf.oracle;
  if (wf.given("checks")) req.checks = split(wf.checks, ',');
  for (const auto& t : wf.tol) {
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ContractViolation("--tol expects name=value, got '" + t + "'");
    req.tolerances[t.substr(0, eq)] = parse_double(t.substr(eq + 1));
  }
  if (wf.assert_bc) req.assert_biconservative = true;
  if (wf.rows) req.rows = true;
  req.jobs = 1;
  if (const char* env = std::getenv("BICONSERVE_JOBS")) req.jobs = std::max(1, std::atoi(env));
  if (wf.given("jobs")) req.jobs = std::max(1, wf.jobs);
  return req;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ContractViolation("cannot write '" + path + "'");
  f << text;
}

Eigen::MatrixXd parse_matrix(const std::string& text) {
  const auto rows = split(text, ';');
  Eigen::MatrixXd m(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto v = parse_doubles(rows[i]);
    if (v.size() != rows.size()) throw ContractViolation("matrix must be square: row " + std::to_string(i + 1) + " has " + std::to_string(v.size()) + " entries");
    for (std::size_t j = 0; j < v.size(); ++j) m(static_cast<long>(i), static_cast<long>(j)) = v[j];
  }
  return m;
}

json spectrum_json(const ShapeSpectrum& sp) {
  json ev = json::array();
  for (const auto& e : sp.real_eigenvalues) ev.push_back({{"value", e.value}, {"algebraic", e.algebraic}, {"geometric", e.geometric}});
  json cp = json::array();
  for (const auto& c : sp.complex_pairs) cp.push_back({{"re", c.re}, {"im", c.im}});
  return {{"case", to_string(sp.case_label)}, {"line", case_line(sp)}, {"pattern", multiplicity_pattern(sp)},
          {"eigenvalues", ev}, {"complex_pairs", cp}, {"note", sp.note}};
}

std::string spectrum_text(const ShapeSpectrum& sp) {
  std::ostringstream o;
  o << case_line(sp) << "\n";
  if (!sp.note.empty()) o << "note: " << sp.note << "\n";
  for (const auto& e : sp.real_eigenvalues)
    o << "  k = " << format_number(e.value) << "  (algebraic " << e.algebraic << ", geometric " << e.geometric << ")\n";
  for (const auto& c : sp.complex_pairs) o << "  k = " << format_number(c.re) << " +- " << format_number(c.im) << "i\n";
  return o.str();
}

int zero_multiplicity(const ShapeSpectrum& sp) {
  int z = 0;
  for (const auto& e : sp.real_eigenvalues)
    if (std::abs(e.value) <= 10.0 * sp.clustering_tol) z += e.algebraic;
  return z;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verification engine for biconservative hypersurfaces of index 2 in E^5_2", "biconserve"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* list = app.add_subcommand("list", "list catalog ids with anchors and side conditions");
  std::string list_family;
  bool list_json = false;
  list->add_option("--family", list_family, "only this family (thm1, thm2, thm3, ex41, rem42, intsurf, intcurve)");
  list->add_flag("--json", list_json, "print a JSON array");

  auto* verify = app.add_subcommand("verify", "run a verification sweep over a grid");
  std::string verify_target;
  verify->add_option("target", verify_target, "catalog id or 'inline'");
  SpecFlags verify_spec;
  SweepFlags verify_sweep;
  verify_spec.add(verify);
  verify_sweep.add(verify, true);

  auto* classify = app.add_subcommand("classify", "classify the shape operator at one point or of a given matrix");
  std::string classify_target, at, matrix, metric, classify_format = "text";
  double classify_tol = kDefaultSpectralTolerance;
  classify->add_option("target", classify_target, "catalog id or 'inline'");
  SpecFlags classify_spec;
  classify_spec.add(classify);
  classify->add_option("--at", at, "point p1,p2,... (use --at=... for a negative first coordinate)");
  classify->add_option("--matrix", matrix, "shape operator rows separated by ';'");
  classify->add_option("--metric", metric, "metric rows separated by ';' (default diag with two -1 entries)");
  classify->add_option("--tol", classify_tol, "spectral tolerance");
  classify->add_option("--format", classify_format, "text or json")->check(CLI::IsMember({"text", "json"}));

  auto* sample = app.add_subcommand("sample", "CSV stream of H, curvatures and residuals over a grid");
  std::string sample_target, columns;
  sample->add_option("target", sample_target, "catalog id or 'inline'");
  SpecFlags sample_spec;
  SweepFlags sample_sweep;
  sample_spec.add(sample);
  sample_sweep.add(sample, false);
  sample->add_option("--columns", columns, "comma-separated column subset, in output order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*list) {
      json arr = json::array();
      std::ostringstream text;
      std::size_t w = 0;
      for (const auto& e : catalog_entries()) w = std::max(w, e.id.size());
      if (!list_family.empty() && std::none_of(catalog_entries().begin(), catalog_entries().end(),
                                               [&](const CatalogEntry& e) { return to_string(e.family) == list_family; }))
        throw ContractViolation("unknown family '" + list_family + "'");
      for (const auto& e : catalog_entries()) {
        if (!list_family.empty() && to_string(e.family) != list_family) continue;
        arr.push_back({{"id", e.id}, {"family", to_string(e.family)}, {"case", e.case_id}, {"dim", e.dim},
                       {"expected_index", e.expected_index}, {"anchor", e.anchor}, {"condition", e.condition},
                       {"description", e.description}});
        text << e.id << std::string(w + 2 - e.id.size(), ' ') << "dim " << e.dim << "  index " << e.expected_index << "  "
             << e.anchor << (e.condition.empty() ? "" : "; " + e.condition) << "\n";
      }
      out << (list_json ? arr.dump(2) + "\n" : text.str());
      return 0;
    }
    if (*verify) {
      const auto req = make_request(verify_target, verify_spec, verify_sweep);
      const auto rep = cmd_verify(req);
      const auto& fmt = verify_sweep.format;
      const std::string text = fmt == "json" ? to_json(rep).dump(2) + "\n" : fmt == "csv" ? report_csv(rep) : report_text(rep);
      emit(text, verify_sweep.output, out);
      return exit_code(rep);
    }
    if (*sample) {
      const auto req = make_request(sample_target, sample_spec, sample_sweep);
      emit(cmd_sample(req, columns.empty() ? std::vector<std::string>{} : split(columns, ',')), sample_sweep.output, out);
      return 0;
    }
    if (*classify) {
      json j;
      std::string text;
      if (!matrix.empty()) {
        const auto S = parse_matrix(matrix);
        Eigen::MatrixXd G;
        if (metric.empty()) {
          G = Eigen::MatrixXd::Identity(S.rows(), S.rows());
          for (int i = 0; i < std::min<int>(2, static_cast<int>(S.rows())); ++i) G(i, i) = -1.0;
        } else {
          G = parse_matrix(metric);
        }
        const auto sp = eigen_structure(S, G, classify_tol);
        j = spectrum_json(sp);
        text = spectrum_text(sp);
      } else {
        if (classify_target.empty()) throw ContractViolation("classify needs a target or --matrix");
        VerifyRequest req;
        req.target = classify_target;
        if (is_catalog_target(classify_target)) req.spec = parse_family_id(classify_target);
        classify_spec.apply(req);
        const auto built = build_target(req);
        if (!built.chart.is_hypersurface()) throw ContractViolation(classify_target + ": no shape operator for a reduced chart");
        const auto p = at.empty() ? built.chart.base() : parse_doubles(at);
        if (static_cast<int>(p.size()) != built.chart.dim())
          throw ContractViolation(classify_target + ": --at needs " + std::to_string(built.chart.dim()) + " coordinates");
        CurvaturePacket pk;
        try {
          pk = packet(built.chart, p);
        } catch (const GeometryError& e) {
          rethrow_with_target(classify_target, e);
        }
        const auto sp = eigen_structure(pk.S, pk.G, classify_tol);
        j = spectrum_json(sp);
        j["target"] = classify_target;
        j["point"] = p;
        j["H"] = pk.H;
        j["zero_multiplicity"] = zero_multiplicity(sp);
        text = spectrum_text(sp) + "  H = " + format_number(pk.H) + "\n";
        if (const int z = zero_multiplicity(sp)) text += "  zero eigenvalue multiplicity " + std::to_string(z) + "\n";
      }
      out << (classify_format == "json" ? j.dump(2) + "\n" : text);
      return 0;
    }
  } catch (const GeometryError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace biconserve::cli
