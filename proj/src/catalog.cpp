#include "biconserve/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "biconserve/errors.hpp"

namespace biconserve {

namespace {

enum class Mode { None, Pair, Pair12, PsiGreater, PsiLess, Ex41 };

struct CaseDef {
  Family family;
  std::string case_id;
  std::string anchor;
  std::string condition;
  std::string description;
  std::vector<std::string> comps;
  Mode mode = Mode::None;
  PairKind kind = PairKind::Sum1;
  int expected_index = 2;
  std::vector<Interval> domain;
  std::vector<std::string> required;  // parameters that must be nonzero
};

const Interval kS{0.5, 1.5};
const Interval kW{-0.5, 0.5};
const Interval kSinh{0.4, 1.2};
const Interval kSin{0.5, 1.3};

std::vector<Interval> box4(Interval t = kW) { return {kS, t, kW, kW}; }

const std::vector<CaseDef>& case_table() {
  static const std::vector<CaseDef> table = [] {
    std::vector<CaseDef> d;
    auto pair = [&](Family f, std::string id, std::string anchor, std::string desc, std::vector<std::string> comps,
                    Mode m, PairKind k, std::vector<Interval> dom) {
      std::string cond;
      const bool two = m == Mode::Pair12;
      const std::string a = two ? "phi1'^2" : "phi'^2";
      const std::string b = two ? "phi2'^2" : "psi'^2";
      if (k == PairKind::Sum1) cond = a + " + " + b + " = 1";
      else if (k == PairKind::DiffPlus) cond = a + " - " + b + " = 1";
      else cond = a + " - " + b + " = -1";
      d.push_back({f, std::move(id), std::move(anchor), cond, std::move(desc), std::move(comps), m, k, 2, std::move(dom), {}});
    };
    auto degen = [&](Family f, std::string id, std::string anchor, std::string desc, std::vector<std::string> comps,
                     Mode m, std::vector<std::string> req) {
      const std::string cond = m == Mode::PsiGreater ? "1 - 2 psi' < 0" : "1 + 2 psi' < 0";
      d.push_back({f, std::move(id), std::move(anchor), req.empty() ? cond : cond + ", a != 0", std::move(desc),
                   std::move(comps), m, PairKind::Sum1, 2, box4(), std::move(req)});
    };

    const Family T1 = Family::THM1;
    const std::string g1 = "generalized cylinder, S = diag(k1, 0, 0, k4)";
    pair(T1, "i", "generalized cylinders (i)", g1 + ", circle in a spacelike plane",
         {"t", "u", "phi(s)*cos(v)", "phi(s)*sin(v)", "psi(s)"}, Mode::Pair, PairKind::Sum1, box4());
    pair(T1, "ii", "generalized cylinders (ii)", g1 + ", hyperbola over a Lorentzian plane",
         {"phi(s)*sinh(v)", "t", "u", "phi(s)*cosh(v)", "psi(s)"}, Mode::Pair, PairKind::Sum1, box4());
    pair(T1, "iii", "generalized cylinders (iii)", g1 + ", circle with timelike profile direction",
         {"psi(s)", "t", "u", "phi(s)*cos(v)", "phi(s)*sin(v)"}, Mode::Pair, PairKind::DiffMinus, box4());
    pair(T1, "iv", "generalized cylinders (iv)", g1 + ", spacelike hyperbola",
         {"phi(s)*cosh(v)", "t", "u", "phi(s)*sinh(v)", "psi(s)"}, Mode::Pair, PairKind::DiffPlus, box4());
    degen(T1, "v", "generalized cylinders (v)", g1 + ", null-plane profile",
          {"v^2*s/2 + psi(s) + s", "t", "u", "v*s", "v^2*s/2 + psi(s)"}, Mode::PsiGreater, {});
    pair(T1, "vi", "generalized cylinders (vi)", g1 + ", circle in a timelike plane",
         {"phi(s)*cos(v)", "phi(s)*sin(v)", "t", "u", "psi(s)"}, Mode::Pair, PairKind::DiffPlus, box4());
    pair(T1, "vii", "generalized cylinders (vii)", g1 + ", timelike hyperbola",
         {"phi(s)*sinh(v)", "psi(s)", "t", "u", "phi(s)*cosh(v)"}, Mode::Pair, PairKind::DiffMinus, box4());
    degen(T1, "viii", "generalized cylinders (viii)", g1 + ", null-plane profile, timelike direction",
          {"s*v^2/2 + psi(s)", "s*v", "t", "u", "s*v^2/2 + psi(s) + s"}, Mode::PsiLess, {});

    const Family T2 = Family::THM2;
    const std::string g2 = "cylinder, S = diag(k1, k2, k2, 0)";
    pair(T2, "i", "cylinders (i)", g2 + ", over a hyperbolic plane",
         {"v", "phi(s)*cosh(t)", "phi(s)*sinh(t)*cos(u)", "phi(s)*sinh(t)*sin(u)", "psi(s)"}, Mode::Pair,
         PairKind::DiffPlus, box4(kSinh));
    pair(T2, "ii", "cylinders (ii)", g2 + ", over a round sphere",
         {"v", "psi(s)", "phi(s)*cos(t)", "phi(s)*sin(t)*cos(u)", "phi(s)*sin(t)*sin(u)"}, Mode::Pair,
         PairKind::DiffMinus, box4(kSin));
    pair(T2, "iii", "cylinders (iii)", g2 + ", over a Lorentzian hyperbolic plane",
         {"phi(s)*cosh(t)*sin(u)", "phi(s)*cosh(t)*cos(u)", "phi(s)*sinh(t)", "psi(s)", "v"}, Mode::Pair,
         PairKind::DiffPlus, box4());
    pair(T2, "iv", "cylinders (iv)", g2 + ", over a de Sitter plane",
         {"psi(s)", "phi(s)*sinh(t)", "phi(s)*cosh(t)*cos(u)", "phi(s)*cosh(t)*sin(u)", "v"}, Mode::Pair,
         PairKind::DiffMinus, box4());
    pair(T2, "v", "cylinders (v)", g2 + ", over a de Sitter plane, timelike axis",
         {"v", "phi(s)*sinh(t)", "phi(s)*cosh(t)*cos(u)", "phi(s)*cosh(t)*sin(u)", "psi(s)"}, Mode::Pair,
         PairKind::Sum1, box4());
    pair(T2, "vi", "cylinders (vi)", g2 + ", over a neutral space form",
         {"phi(s)*sinh(t)*cos(u)", "phi(s)*sinh(t)*sin(u)", "phi(s)*cosh(t)", "psi(s)", "v"}, Mode::Pair,
         PairKind::Sum1, box4(kSinh));
    degen(T2, "vii", "cylinders (vii)", g2 + ", over a degenerate-plane surface",
          {"s*(t^2 + u^2)/2 + psi(s)", "v", "s*t", "s*u", "s*(t^2 + u^2)/2 + psi(s) - s"}, Mode::PsiGreater, {});
    degen(T2, "viii", "cylinders (viii)", g2 + ", over a Lorentzian degenerate-plane surface",
          {"s*(t^2 - u^2)/2 + psi(s)", "s*t", "s*u", "v", "s*(t^2 - u^2)/2 + psi(s) + s"}, Mode::PsiLess, {});

    const Family T3 = Family::THM3;
    const std::string g3 = "three curvatures, S = diag(k1, k2, k2, k4)";
    pair(T3, "i", "three-curvature hypersurfaces (i)", g3 + ", hyperbolic plane times hyperbola",
         {"phi2(s)*sinh(v)", "phi1(s)*cosh(t)", "phi1(s)*sinh(t)*cos(u)", "phi1(s)*sinh(t)*sin(u)", "phi2(s)*cosh(v)"},
         Mode::Pair12, PairKind::DiffPlus, box4(kSinh));
    pair(T3, "ii", "three-curvature hypersurfaces (ii)", g3 + ", sphere times timelike circle",
         {"phi2(s)*cos(v)", "phi2(s)*sin(v)", "phi1(s)*cos(t)", "phi1(s)*sin(t)*cos(u)", "phi1(s)*sin(t)*sin(u)"},
         Mode::Pair12, PairKind::DiffMinus, box4(kSin));
    pair(T3, "iii", "three-curvature hypersurfaces (iii)", g3 + ", Lorentzian hyperbolic plane times circle",
         {"phi1(s)*cosh(t)*sin(u)", "phi1(s)*cosh(t)*cos(u)", "phi1(s)*sinh(t)", "phi2(s)*cos(v)", "phi2(s)*sin(v)"},
         Mode::Pair12, PairKind::DiffPlus, box4());
    pair(T3, "iv", "three-curvature hypersurfaces (iv)", g3 + ", de Sitter plane times timelike hyperbola",
         {"phi2(s)*sinh(v)", "phi1(s)*sinh(t)", "phi1(s)*cosh(t)*cos(u)", "phi1(s)*cosh(t)*sin(u)", "phi2(s)*cosh(v)"},
         Mode::Pair12, PairKind::Sum1, box4());
    pair(T3, "v", "three-curvature hypersurfaces (v)", g3 + ", de Sitter plane times spacelike hyperbola",
         {"phi2(s)*cosh(v)", "phi1(s)*sinh(t)", "phi1(s)*cosh(t)*cos(u)", "phi1(s)*cosh(t)*sin(u)", "phi2(s)*sinh(v)"},
         Mode::Pair12, PairKind::DiffMinus, box4());
    pair(T3, "vi", "three-curvature hypersurfaces (vi)", g3 + ", neutral space form times circle",
         {"phi1(s)*sinh(t)*cos(u)", "phi1(s)*sinh(t)*sin(u)", "phi1(s)*cosh(t)", "phi2(s)*cos(v)", "phi2(s)*sin(v)"},
         Mode::Pair12, PairKind::Sum1, box4(kSinh));
    degen(T3, "vii", "three-curvature hypersurfaces (vii)", g3 + ", degenerate-plane type",
          {"s/2*(t^2 + u^2 - v^2) - {a}*v^2 + psi(s)", "v*(2*{a} + s)", "s*t", "s*u",
           "s/2*(t^2 + u^2 - v^2) - {a}*v^2 + psi(s) - s"},
          Mode::PsiGreater, {"a"});
    degen(T3, "viii", "three-curvature hypersurfaces (viii)", g3 + ", Lorentzian degenerate-plane type",
          {"s*(t^2 - u^2 - v^2)/2 + {a}*v^2 + psi(s)", "s*t", "s*u", "v*(s - 2*{a})",
           "s*(t^2 - u^2 - v^2)/2 + {a}*v^2 + psi(s) + s"},
          Mode::PsiLess, {"a"});

    d.push_back({Family::EX41, "", "four-curvature example", "a != 0, 2 psi' - 1 > 0",
                 "four distinct principal curvatures; biconservative when psi solves its ODE",
                 {"-{a}*v^2 + {b}*u^2 + s*(t^2 + u^2 - v^2)/2 + psi(s)", "v*(s + 2*{a})", "s*t", "u*(s + 2*{b})",
                  "-{a}*v^2 + {b}*u^2 + s*(t^2 + u^2 - v^2)/2 + psi(s) - s"},
                 Mode::Ex41, PairKind::Sum1, 2, {{0.5, 2.0}, kW, kW, kW}, {"a"}});
    d.push_back({Family::REM42, "", "n-dimensional extension of the four-curvature example",
                 "a_i distinct, 2 psi' - 1 > 0", "n + 1 distinct principal curvatures with a zero-offset axis",
                 {}, Mode::Ex41, PairKind::Sum1, 2, {}, {}});

    auto surf = [&](std::string id, std::string desc, std::vector<std::string> comps, int idx, Interval t) {
      const bool radial = std::any_of(comps.begin(), comps.end(),
                                      [](const std::string& c) { return c.find("{r}") != std::string::npos; });
      d.push_back({Family::INTSURF, std::move(id), "integral surfaces of D", radial ? "r > 0" : "none", std::move(desc),
                   std::move(comps), Mode::None, PairKind::Sum1, idx, {t, kW}, {}});
    };
    surf("i", "totally geodesic spacelike 2-plane", {"0", "0", "t", "u", "0"}, 0, kW);
    surf("ii", "hyperbolic plane H^2(-r^2) in a Lorentzian 3-plane",
         {"0", "{r}*cosh(t)", "{r}*sinh(t)*cos(u)", "{r}*sinh(t)*sin(u)", "0"}, 0, kSinh);
    surf("iii", "round sphere S^2(r^2) in a Euclidean 3-plane",
         {"0", "0", "{r}*cos(t)", "{r}*sin(t)*cos(u)", "{r}*sin(t)*sin(u)"}, 0, kSin);
    surf("iv", "spacelike surface in a degenerate hyperplane",
         {"{A}*t^2 + {A}*u^2", "0", "t", "u", "{A}*t^2 + {A}*u^2"}, 0, kW);
    surf("v", "Lorentzian space form H^2_1(-r^2)", {"{r}*cosh(t)*sin(u)", "{r}*cosh(t)*cos(u)", "{r}*sinh(t)", "0", "0"},
         1, kW);
    surf("vi", "Lorentzian surface in a degenerate hyperplane",
         {"{A}*t^2 - {A}*u^2", "t", "u", "0", "{A}*t^2 - {A}*u^2"}, 1, kW);
    surf("vii", "de Sitter plane S^2_1(r^2)", {"0", "{r}*sinh(t)", "{r}*cosh(t)*cos(u)", "{r}*cosh(t)*sin(u)", "0"}, 1,
         kW);
    surf("viii", "neutral space form S^2_2(r^2)", {"{r}*sinh(t)*cos(u)", "{r}*sinh(t)*sin(u)", "{r}*cosh(t)", "0", "0"}, 2,
         kSinh);

    auto curve = [&](std::string id, std::string desc, std::vector<std::string> comps, int idx, std::string cond) {
      std::vector<std::string> req;
      if (cond == "a != 0") req = {"a"};
      d.push_back({Family::INTCURVE, std::move(id), "integral curves of e4", std::move(cond), std::move(desc),
                   std::move(comps), Mode::None, PairKind::Sum1, idx, {kW}, std::move(req)});
    };
    curve("A", "straight line (k4 = 0)", {"0", "0", "v", "0", "0"}, 0, "none");
    curve("B", "circle in a spacelike plane", {"0", "0", "cos({R}*v)/{R}", "sin({R}*v)/{R}", "0"}, 0, "R > 0");
    curve("C", "timelike hyperbola", {"sinh({R}*v)/{R}", "0", "0", "0", "cosh({R}*v)/{R}"}, 1, "R > 0");
    curve("D", "spacelike hyperbola", {"cosh({R}*v)/{R}", "0", "0", "0", "sinh({R}*v)/{R}"}, 0, "R > 0");
    curve("E", "spacelike null-plane parabola", {"{a}*v^2", "0", "v", "0", "{a}*v^2"}, 0, "a != 0");
    curve("F", "circle in a timelike plane", {"cos({R}*v)/{R}", "sin({R}*v)/{R}", "0", "0", "0"}, 1, "R > 0");
    curve("G", "timelike null-plane parabola", {"{a}*v^2", "v", "0", "0", "{a}*v^2"}, 1, "a != 0");
    return d;
  }();
  return table;
}

const std::vector<std::string>& family_prefixes() {
  static const std::vector<std::string> p{"thm1", "thm2", "thm3", "ex41", "rem42", "intsurf", "intcurve"};
  return p;
}

std::string fmt(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, r.ptr);
  return x < 0 ? "(" + s + ")" : s;
}

std::string substitute(std::string text, const FamilySpec& spec) {
  for (const char* name : {"a", "b", "r", "A", "R"}) {
    const std::string key = std::string("{") + name + "}";
    for (std::size_t pos; (pos = text.find(key)) != std::string::npos;) text.replace(pos, key.size(), fmt(spec.param(name)));
  }
  return text;
}

const CaseDef& find_case(Family f, const std::string& case_id) {
  for (const auto& c : case_table())
    if (c.family == f && c.case_id == case_id) return c;
  throw ContractViolation("unknown case '" + case_id + "' for family " + to_string(f));
}

std::vector<double> s_nodes(const Interval& s, int n = 41) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = s.lo + s.width() * i / (n - 1);
  return out;
}

bool is_auto(const std::string& v) { return v.rfind("auto", 0) == 0; }

std::string slot(const FamilySpec& spec, const std::string& name) {
  auto it = spec.profiles.find(name);
  return it == spec.profiles.end() ? "auto" : it->second;
}

void check_nonvanishing(const std::string& id, const std::string& what, const Interval& s, double shift) {
  if (s.lo + shift <= 1e-8 && s.hi + shift >= -1e-8)
    throw DomainError(id + ": " + what + " vanishes on the domain s in [" + fmt(s.lo) + ", " + fmt(s.hi) + "]");
}

void check_psi_sign(const std::string& id, const Profile& psi, const Interval& s, bool greater) {
  for (double x : s_nodes(s)) {
    const double d = psi.derivatives(x, 1)[1];
    const double lhs = greater ? 1.0 - 2.0 * d : 1.0 + 2.0 * d;
    if (!(lhs < -1e-6))
      throw ConstraintError(id + ": violates " + std::string(greater ? "1 - 2 psi' < 0" : "1 + 2 psi' < 0") +
                            " at s = " + fmt(x) + " (value " + fmt(lhs) + ")");
  }
}

ProfilePtr default_psi(bool greater) {
  return ExpressionProfile::parse(greater ? "s + 0.1*s^2" : "-s - 0.1*s^2");
}

ImmersionChart make_chart(const std::string& id, std::vector<std::string> names, const std::vector<std::string>& comps,
                          std::vector<Interval> domain, ProfileBank bank, int ambient_dim, int expected_index) {
  ImmersionChart c;
  c.id = id;
  c.param_names = std::move(names);
  const auto pnames = bank.names();
  for (const auto& e : comps) c.components.push_back(parse_expression(e, c.param_names, pnames));
  c.domain = ParameterBox(std::move(domain));
  c.bank = std::move(bank);
  c.signature = Signature(ambient_dim, 2);
  c.expected_index = expected_index;
  c.validate();
  return c;
}

void check_base(const ImmersionChart& c) {
  const auto p = c.base();
  if (c.is_hypersurface()) (void)packet(c, p);
  else (void)fundamental_forms(c, p);
}

ProfilePtr ode_psi(const FamilySpec& spec, const std::vector<double>& offsets, const Interval& s, std::string& note) {
  const std::string p = slot(spec, "psi");
  if (!is_auto(p) && !spec.solve_psi) {
    note = "psi = " + p;
    return ExpressionProfile::parse(p);
  }
  const double c = spec.param("c");
  note = "psi solved, c = " + fmt(c);
  return solve_psi_general(offsets, c, s);
}

}  // namespace

std::string to_string(Family f) {
  return family_prefixes()[static_cast<std::size_t>(f)];
}

double FamilySpec::param(const std::string& name) const {
  auto it = params.find(name);
  if (it != params.end()) return it->second;
  if (name == "b") return 2.0;
  if (name == "n") return 4.0;
  return 1.0;
}

std::string FamilySpec::id() const {
  const std::string f = to_string(family);
  return case_id.empty() ? f : f + "." + case_id;
}

FamilySpec parse_family_id(std::string_view id) {
  const auto dot = id.find('.');
  const std::string fam(id.substr(0, dot));
  const std::string cs = dot == std::string_view::npos ? "" : std::string(id.substr(dot + 1));
  const auto& pre = family_prefixes();
  const auto it = std::find(pre.begin(), pre.end(), fam);
  if (it == pre.end()) throw ContractViolation("unknown family '" + fam + "'");
  FamilySpec s;
  s.family = static_cast<Family>(it - pre.begin());
  s.case_id = cs;
  if (s.family == Family::REM42) {
    if (!cs.empty()) throw ContractViolation("rem42 takes no case id");
    s.offsets = {1.0, 2.0, 3.0};
    return s;
  }
  (void)find_case(s.family, cs);
  return s;
}

const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> out;
    for (const auto& c : case_table()) {
      CatalogEntry e;
      e.family = c.family;
      e.case_id = c.case_id;
      e.id = c.case_id.empty() ? to_string(c.family) : to_string(c.family) + "." + c.case_id;
      e.anchor = c.anchor;
      e.condition = c.condition;
      e.description = c.description;
      e.dim = c.family == Family::INTSURF ? 2 : c.family == Family::INTCURVE ? 1 : c.family == Family::REM42 ? 5 : 4;
      e.expected_index = c.expected_index;
      out.push_back(std::move(e));
    }
    return out;
  }();
  return entries;
}

const CatalogEntry& catalog_entry(std::string_view id) {
  for (const auto& e : catalog_entries())
    if (e.id == id) return e;
  throw ContractViolation("unknown catalog id '" + std::string(id) + "'");
}

BuiltChart build(const FamilySpec& spec) {
  if (spec.family == Family::REM42)
    return build_remark42(static_cast<int>(spec.param("n")), spec.offsets, spec);
  const CaseDef& def = find_case(spec.family, spec.case_id);
  const std::string id = spec.id();
  for (const auto& r : def.required)
    if (spec.param(r) == 0.0) throw ConstraintError(id + ": violates " + r + " != 0");
  for (const char* r : {"r", "R"})
    if ((def.condition.find(std::string(r) + " > 0") != std::string::npos) && !(spec.param(r) > 0))
      throw ConstraintError(id + ": violates " + r + " > 0");

  std::vector<Interval> domain = spec.domain.value_or(def.domain);
  if (domain.size() != def.domain.size()) throw ContractViolation(id + ": domain has the wrong number of axes");
  BuiltChart out;
  out.spec = spec;
  ProfileBank bank;
  std::vector<std::string> names;
  int ambient = 5;
  switch (spec.family) {
    case Family::INTSURF: names = {"t", "u"}; break;
    case Family::INTCURVE: names = {"v"}; break;
    default: names = {"s", "t", "u", "v"}; break;
  }
  const Interval s = domain[0];

  if (def.mode == Mode::Pair || def.mode == Mode::Pair12) {
    const bool two = def.mode == Mode::Pair12;
    const std::string n1 = two ? "phi1" : "phi", n2 = two ? "phi2" : "psi";
    const std::string p1 = slot(spec, n1), p2 = slot(spec, n2);
    ProfilePair pp;
    if (is_auto(p1) && is_auto(p2)) {
      PairKind kind = def.kind;
      for (const auto& p : {p1, p2})
        if (p.size() > 5) kind = pair_kind_from_string(p.substr(5));
      const Expr theta = parse_expression(spec.theta, std::vector<std::string>{"s"}, {});
      pp = make_profile_pair(kind, theta, spec.s0, spec.phi0, spec.psi0.value_or(two ? 1.0 : 0.0));
      out.profile_note = n1 + ", " + n2 + " from " + to_string(kind) + " with theta = " + spec.theta;
    } else if (!is_auto(p1) && !is_auto(p2)) {
      pp = {ExpressionProfile::parse(p1), ExpressionProfile::parse(p2)};
      out.profile_note = n1 + " = " + p1 + ", " + n2 + " = " + p2;
    } else {
      throw ContractViolation(id + ": give both " + n1 + " and " + n2 + " as expressions, or neither");
    }
    for (double x : s_nodes(s)) {
      const double res = pair_constraint_residual(def.kind, *pp.phi, *pp.psi, x);
      if (!(res <= 1e-8))
        throw ConstraintError(id + ": violates " + def.condition + " at s = " + fmt(x) + " (residual " + fmt(res) + ")");
    }
    bank.set(n1, pp.phi);
    bank.set(n2, pp.psi);
  } else if (def.mode == Mode::PsiGreater || def.mode == Mode::PsiLess) {
    const bool greater = def.mode == Mode::PsiGreater;
    ProfilePtr psi;
    const std::string p = slot(spec, "psi");
    if (spec.solve_psi) {
      if (!(spec.family == Family::THM3 && spec.case_id == "vii"))
        throw ContractViolation(id + ": no biconservative ODE is available for this case");
      out.ode_offsets = {0.0, 0.0, 2.0 * spec.param("a")};
      check_nonvanishing(id, "s + 2a", s, 2.0 * spec.param("a"));
      check_nonvanishing(id, "s", s, 0.0);
      psi = solve_psi_general(out.ode_offsets, spec.param("c"), s);
      out.asserts_biconservative = true;
      out.profile_note = "psi solved, c = " + fmt(spec.param("c"));
    } else if (is_auto(p)) {
      psi = default_psi(greater);
      out.profile_note = "psi = " + psi->describe();
    } else {
      psi = ExpressionProfile::parse(p);
      out.profile_note = "psi = " + p;
    }
    check_psi_sign(id, *psi, s, greater);
    bank.set("psi", psi);
  } else if (def.mode == Mode::Ex41) {
    const double a = spec.param("a"), b = spec.param("b");
    check_nonvanishing(id, "s", s, 0.0);
    check_nonvanishing(id, "s + 2a", s, 2 * a);
    check_nonvanishing(id, "s + 2b", s, 2 * b);
    out.ode_offsets = {0.0, 2 * a, 2 * b};
    const auto psi = ode_psi(spec, out.ode_offsets, s, out.profile_note);
    for (double x : s_nodes(s)) {
      const double v = 2.0 * psi->derivatives(x, 1)[1] - 1.0;
      if (!(v > 1e-6)) throw ConstraintError(id + ": violates 2 psi' - 1 > 0 at s = " + fmt(x));
    }
    bank.set("psi", psi);
    out.asserts_biconservative = true;
  }

  std::vector<std::string> comps;
  for (const auto& c : def.comps) comps.push_back(substitute(c, spec));
  out.chart = make_chart(id, names, comps, domain, std::move(bank), ambient, def.expected_index);
  check_base(out.chart);
  return out;
}

BuiltChart build_remark42(int n, std::vector<double> a, FamilySpec base) {
  if (n < 4) throw ContractViolation("rem42: n must be at least 4");
  if (static_cast<int>(a.size()) != n - 1)
    throw ContractViolation("rem42: expected " + std::to_string(n - 1) + " offsets, got " + std::to_string(a.size()));
  base.family = Family::REM42;
  base.case_id.clear();
  base.offsets = a;
  base.params["n"] = n;
  const std::string id = "rem42";
  if (a[0] == 0.0) throw ConstraintError(id + ": violates a_1 != 0");

  std::vector<std::string> names{"s", "t0"};
  for (int j = 1; j < n; ++j) names.push_back("t" + std::to_string(j));
  std::vector<Interval> domain = base.domain.value_or(std::vector<Interval>{});
  if (domain.empty()) {
    domain.push_back({0.5, 2.0});
    for (int j = 0; j < n; ++j) domain.push_back(kW);
  }
  if (static_cast<int>(domain.size()) != n + 1) throw ContractViolation("rem42: domain has the wrong number of axes");
  const Interval s = domain[0];

  // F = -a1 t1^2 + sum_{j>=2} a_j t_j^2 + s (t0^2 + sum_{j>=2} t_j^2 - t1^2) / 2 + psi
  std::string quad = "-" + fmt(a[0]) + "*t1^2", sq = "t0^2 - t1^2";
  for (int j = 2; j < n; ++j) {
    const std::string tj = "t" + std::to_string(j);
    quad += " + " + fmt(a[j - 1]) + "*" + tj + "^2";
    sq += " + " + tj + "^2";
  }
  const std::string F = quad + " + s*(" + sq + ")/2 + psi(s)";
  std::vector<std::string> comps{F, "t1*(s + 2*" + fmt(a[0]) + ")", "s*t0"};
  for (int j = 2; j < n; ++j) comps.push_back("t" + std::to_string(j) + "*(s + 2*" + fmt(a[j - 1]) + ")");
  comps.push_back(F + " - s");

  BuiltChart out;
  out.ode_offsets = {0.0};
  check_nonvanishing(id, "s", s, 0.0);
  for (double ai : a) {
    check_nonvanishing(id, "s + 2a_i", s, 2 * ai);
    out.ode_offsets.push_back(2 * ai);
  }
  const auto psi = ode_psi(base, out.ode_offsets, s, out.profile_note);
  for (double x : s_nodes(s))
    if (!(2.0 * psi->derivatives(x, 1)[1] - 1.0 > 1e-6))
      throw ConstraintError(id + ": violates 2 psi' - 1 > 0 at s = " + fmt(x));
  ProfileBank bank;
  bank.set("psi", psi);
  out.chart = make_chart(id, names, comps, domain, std::move(bank), n + 2, 2);
  out.spec = std::move(base);
  out.asserts_biconservative = true;
  check_base(out.chart);
  return out;
}

bool family_pattern_matches(Family family, const ShapeSpectrum& sp, int dim, int* zero_multiplicity) {
  int zeros = 0, simple = 0, nonzero_double = 0;
  for (const auto& e : sp.real_eigenvalues) {
    const bool zero = std::abs(e.value) <= 10.0 * sp.clustering_tol;
    if (zero) zeros += e.algebraic;
    if (e.algebraic == 1) ++simple;
    if (!zero && e.algebraic == 2) ++nonzero_double;
  }
  if (zero_multiplicity) *zero_multiplicity = zeros;
  bool ok = sp.case_label == ShapeCase::I;
  switch (family) {
    case Family::THM1: ok = ok && zeros >= 2; break;
    case Family::THM2: ok = ok && zeros == 1 && nonzero_double == 1; break;
    case Family::THM3: ok = ok && multiplicity_pattern(sp) == "1+2+1" && zeros == 0; break;
    case Family::EX41:
    case Family::REM42: ok = ok && simple == dim; break;
    default: break;
  }
  return ok;
}

StructureReport verify_structure(const BuiltChart& built, int nodes_per_axis) {
  const auto& chart = built.chart;
  StructureReport rep;
  rep.id = chart.id;
  if (!chart.is_hypersurface()) {
    const Grid grid(chart.domain, std::vector<int>(chart.dim(), nodes_per_axis));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto p = grid.point(k);
      const auto r = identity_residuals(chart, p);
      rep.gauss_max = std::max(rep.gauss_max, r.gauss);
      rep.codazzi_max = std::max(rep.codazzi_max, r.codazzi);
      rep.metric_index = fundamental_forms(chart, p).metric_index;
      ++rep.points;
    }
    rep.notes.push_back("reduced chart: no shape-operator pattern");
    return rep;
  }
  const Grid grid(chart.domain, std::vector<int>(chart.dim(), nodes_per_axis));
  int cmc_points = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto p = grid.point(k);
    const auto pk = packet(chart, p);
    rep.metric_index = pk.metric_index;
    cmc_points += pk.cmc;
    const auto sp = eigen_structure(pk.S, pk.G);
    const auto cls = classify_case(sp);
    ++rep.patterns[to_string(sp.case_label) + " " + cls.pattern];
    ++rep.labels[to_string(sp.case_label)];
    int zeros = 0;
    const bool ok = family_pattern_matches(built.spec.family, sp, chart.dim(), &zeros);
    rep.zero_multiplicity_min = std::min(rep.zero_multiplicity_min, zeros);
    rep.zero_multiplicity_max = std::max(rep.zero_multiplicity_max, zeros);
    rep.family_pattern_ok = rep.family_pattern_ok && ok;
    const auto r = identity_residuals(chart, p);
    rep.gauss_max = std::max(rep.gauss_max, r.gauss);
    rep.codazzi_max = std::max(rep.codazzi_max, r.codazzi);
    ++rep.points;
  }
  if (cmc_points == rep.points)
    rep.notes.push_back("constant mean curvature on every sample; the biconservative condition holds vacuously");
  if (rep.zero_multiplicity_max >= 3)
    rep.notes.push_back("zero eigenvalue reaches multiplicity " + std::to_string(rep.zero_multiplicity_max));
  return rep;
}

}  // namespace biconserve
