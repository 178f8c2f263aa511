#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace biconserve {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Closed axis-aligned box in parameter space.
class ParameterBox {
 public:
  ParameterBox() = default;
  explicit ParameterBox(std::vector<Interval> axes);

  std::size_t dim() const { return axes_.size(); }
  const Interval& axis(std::size_t i) const { return axes_[i]; }
  std::span<const Interval> axes() const { return axes_; }
  std::vector<double> center() const;
  bool contains(std::span<const double> p) const;
  /// True when every coordinate is at least `margin` inside its interval.
  bool interior(std::span<const double> p, double margin) const;
  /// Uniform sample keeping `margin` away from the faces.
  std::vector<double> sample(std::mt19937_64& rng, double margin = 0.0) const;

 private:
  std::vector<Interval> axes_;
};

/// Tensor grid over a box; points enumerate in lexicographic index order with
/// the last axis varying fastest.
class Grid {
 public:
  Grid(ParameterBox box, std::vector<int> nodes);

  std::size_t size() const { return total_; }
  std::size_t dim() const { return box_.dim(); }
  const ParameterBox& box() const { return box_; }
  std::span<const int> nodes() const { return nodes_; }
  std::vector<int> multi_index(std::size_t flat) const;
  std::vector<double> point(std::size_t flat) const;

 private:
  ParameterBox box_;
  std::vector<int> nodes_;
  std::size_t total_ = 1;
};

}  // namespace biconserve
