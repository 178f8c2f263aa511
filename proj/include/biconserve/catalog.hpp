#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biconserve/box.hpp"
#include "biconserve/immersion.hpp"
#include "biconserve/spectral.hpp"

namespace biconserve {

enum class Family { THM1, THM2, THM3, EX41, REM42, INTSURF, INTCURVE };

std::string to_string(Family f);

/// Everything needed to build one catalog chart.
///
/// Profile slots ("phi", "psi", "phi1", "phi2") hold either an expression in
/// `s` or one of "auto", "auto-sum1", "auto-diffP", "auto-diffM". Missing
/// slots mean "auto": pair cases integrate the case's constraint from the
/// angle `theta`; single-psi cases use a fixed admissible polynomial; ex41
/// and rem42 solve the biconservative ODE.
struct FamilySpec {
  Family family = Family::EX41;
  std::string case_id;  // "i".."viii", "A".."G"; empty for ex41 / rem42
  std::map<std::string, double> params;  // r, A, a, b, c, R
  std::vector<double> offsets;           // rem42: a_1 .. a_{n-1}
  std::map<std::string, std::string> profiles;
  bool solve_psi = false;
  std::string theta = "0.3*s";
  double s0 = 1.0;
  double phi0 = 1.5;
  std::optional<double> psi0;  // default 0, or 1 for the second profile of thm3
  std::optional<std::vector<Interval>> domain;

  std::string id() const;
  double param(const std::string& name) const;
};

/// Parse "thm3.vii", "ex41", "intcurve.B", ... into a spec with defaults.
/// Throws ContractViolation for unknown ids.
FamilySpec parse_family_id(std::string_view id);

struct CatalogEntry {
  std::string id;
  Family family;
  std::string case_id;
  std::string anchor;
  std::string condition;
  std::string description;
  int dim = 4;
  int expected_index = 2;
};

/// Every catalog id in a fixed order: thm1, thm2, thm3, ex41, rem42,
/// intsurf, intcurve.
const std::vector<CatalogEntry>& catalog_entries();
const CatalogEntry& catalog_entry(std::string_view id);

struct BuiltChart {
  ImmersionChart chart;
  FamilySpec spec;
  /// Offsets o_i of the biconservative ODE when the family has one.
  std::vector<double> ode_offsets;
  /// Whether the biconservative condition is a claim to check for this chart.
  bool asserts_biconservative = false;
  /// Human-readable profile summary ("psi solved, c = 1", ...).
  std::string profile_note;
};

/// Build and check side conditions on the domain. Throws ConstraintError
/// naming the violated condition, DomainError for singular domains, and
/// UnexpectedIndex / DegenerateMetric from the base-point metric check.
BuiltChart build(const FamilySpec& spec);

/// Remark-style extension: axes s, t0 (offset 0), t1 (timelike, offset
/// a_1), t2..t_{n-1}; a hypersurface of dimension n + 1 in E^{n+2}_2.
BuiltChart build_remark42(int n, std::vector<double> a, FamilySpec base = {});

struct StructureReport {
  std::string id;
  int points = 0;
  std::map<std::string, int> patterns;  // "I 1+2+1" -> count
  std::map<std::string, int> labels;
  bool family_pattern_ok = true;
  std::vector<std::string> notes;
  double gauss_max = 0.0;
  double codazzi_max = 0.0;
  int metric_index = -1;
  int zero_multiplicity_min = 99;
  int zero_multiplicity_max = 0;
};

/// Expected shape-operator pattern of a family at one point: thm1 has 0 with
/// multiplicity >= 2, thm2 a simple 0 and a double nonzero eigenvalue, thm3
/// "1+2+1" with no zero, ex41 and rem42 all simple. Every family is Case I.
/// An eigenvalue counts as zero when |k| <= 10 * clustering_tol.
bool family_pattern_matches(Family family, const ShapeSpectrum& sp, int dim, int* zero_multiplicity = nullptr);

/// Sample the domain (nodes per axis) and check the expected shape-operator
/// pattern of the family: thm1 has 0 with multiplicity >= 2, thm2 a simple 0
/// and a double nonzero eigenvalue, thm3 "1+2+1" with no zero.
StructureReport verify_structure(const BuiltChart& built, int nodes_per_axis = 5);

}  // namespace biconserve
