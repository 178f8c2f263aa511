#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "biconserve/box.hpp"
#include "biconserve/catalog.hpp"

namespace biconserve::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchema = 1;

/// One verification sweep. Serializes to the "config" echo of a report and
/// parses back from it (and from --config files).
///
/// `target` is a catalog id or "inline"; an inline chart takes its
/// components from `chart`, its parameter names from `axes` and its profiles
/// from `spec.profiles` (closed-form expressions in s).
struct VerifyRequest {
  std::string target;
  FamilySpec spec;
  std::vector<std::string> chart;
  std::vector<std::string> axes;
  std::vector<int> nodes;      // per axis, each >= 2; empty means 5 per axis
  std::vector<Interval> range;  // inside the chart domain; empty means the domain
  int random_points = 0;        // > 0 replaces the grid by seeded uniform samples
  std::uint64_t seed = 0;
  std::vector<std::string> checks;  // empty means every check that applies
  std::map<std::string, double> tolerances;
  std::string oracle = "ad";                  // "ad" or "fd"
  std::optional<bool> assert_biconservative;  // default: the catalog's claim
  bool rows = false;                          // keep per-point rows in the report
  int jobs = 1;                               // not echoed: results do not depend on it
};

nlohmann::json to_json(const VerifyRequest& req);
VerifyRequest request_from_json(const nlohmann::json& j);

/// Check names accepted in VerifyRequest::checks.
const std::vector<std::string>& check_names();

struct CheckSummary {
  std::string name;
  double max = 0.0;
  double mean = 0.0;
  std::vector<double> argmax;
  double tolerance = 0.0;
  int evaluated = 0;
  bool asserted = true;
  /// "pass", "fail", "vacuous (constant mean curvature)" or
  /// "not asserted (profile not biconservative-solved)".
  std::string status;
  bool failed() const { return status == "fail"; }
};

struct PointRow {
  std::vector<double> point;
  double H = 0.0;
  std::vector<double> k;  // real parts of the eigenvalues of S, ascending
  std::string label;
  std::string pattern;
  bool pattern_ok = true;
  bool cmc = false;
  std::map<std::string, double> residuals;  // NaN where a check does not apply
};

struct ResidualReport {
  std::string target;
  nlohmann::json config;
  int points = 0;
  std::vector<CheckSummary> checks;
  std::map<std::string, int> label_histogram;  // "Case I, 1+1+1+1" -> count
  std::vector<Interval> curvature_ranges;      // per k_i over all points
  std::vector<std::string> notes;
  std::vector<PointRow> rows;
  bool passed = true;
};

/// Resolve defaults (grid, range, checks, tolerances) into the request so
/// that the echoed config reproduces the run exactly.
VerifyRequest resolve(const VerifyRequest& req, const BuiltChart& built);

BuiltChart build_target(const VerifyRequest& req);

/// Sample points of a resolved request in lexicographic grid order (or seed
/// order for random points).
std::vector<std::vector<double>> sample_points(const VerifyRequest& resolved, const BuiltChart& built);

/// Throws GeometryError (prefixed with the target id) on any lower-module
/// failure.
ResidualReport cmd_verify(const VerifyRequest& req);

/// 0 when every asserted check passes, 1 otherwise.
int exit_code(const ResidualReport& rep);

nlohmann::json to_json(const ResidualReport& rep);
std::string report_csv(const ResidualReport& rep);
std::string report_text(const ResidualReport& rep);

/// Columns available to `sample` for a chart: parameter names, then H,
/// k1..kd, label, pattern and the residual names for hypersurfaces.
std::vector<std::string> sample_columns(const BuiltChart& built);
std::vector<std::string> default_sample_columns(const BuiltChart& built);
std::string cmd_sample(const VerifyRequest& req, const std::vector<std::string>& columns);

/// "Case I, 4 distinct", "Case I, 1+2+1", "Case III, 1+1+2c", "unresolved".
std::string case_line(const ShapeSpectrum& sp);

/// RFC 4180 field quoting and locale-free shortest round-trip numbers.
std::string csv_field(const std::string& s);
std::string format_number(double x);

/// Whole program: parses argv, writes to out/err, returns the exit code
/// (0 pass, 1 fail, 2 error).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace biconserve::cli
