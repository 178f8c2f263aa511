#include "biconserve/box.hpp"

#include "biconserve/errors.hpp"

namespace biconserve {

ParameterBox::ParameterBox(std::vector<Interval> axes) : axes_(std::move(axes)) {
  for (const auto& a : axes_)
    if (!(a.lo <= a.hi)) throw ContractViolation("parameter interval with lo > hi");
}

std::vector<double> ParameterBox::center() const {
  std::vector<double> c;
  c.reserve(axes_.size());
  for (const auto& a : axes_) c.push_back(a.mid());
  return c;
}

bool ParameterBox::contains(std::span<const double> p) const {
  if (p.size() != axes_.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!axes_[i].contains(p[i])) return false;
  return true;
}

bool ParameterBox::interior(std::span<const double> p, double margin) const {
  if (p.size() != axes_.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] < axes_[i].lo + margin || p[i] > axes_[i].hi - margin) return false;
  return true;
}

std::vector<double> ParameterBox::sample(std::mt19937_64& rng, double margin) const {
  std::vector<double> p;
  p.reserve(axes_.size());
  for (const auto& a : axes_) {
    const double lo = a.lo + margin, hi = a.hi - margin;
    if (!(lo <= hi)) throw ContractViolation("sampling margin exceeds the box");
    std::uniform_real_distribution<double> dist(lo, hi);
    p.push_back(dist(rng));
  }
  return p;
}

Grid::Grid(ParameterBox box, std::vector<int> nodes) : box_(std::move(box)), nodes_(std::move(nodes)) {
  if (nodes_.size() != box_.dim()) throw ContractViolation("grid node counts do not match box dimension");
  for (int n : nodes_) {
    if (n < 2) throw ContractViolation("grid needs at least 2 nodes per axis");
    total_ *= static_cast<std::size_t>(n);
  }
}

std::vector<int> Grid::multi_index(std::size_t flat) const {
  std::vector<int> idx(nodes_.size());
  for (std::size_t k = nodes_.size(); k-- > 0;) {
    idx[k] = static_cast<int>(flat % static_cast<std::size_t>(nodes_[k]));
    flat /= static_cast<std::size_t>(nodes_[k]);
  }
  return idx;
}

std::vector<double> Grid::point(std::size_t flat) const {
  const auto idx = multi_index(flat);
  std::vector<double> p(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& a = box_.axis(k);
    p[k] = a.lo + a.width() * idx[k] / (nodes_[k] - 1);
  }
  return p;
}

}  // namespace biconserve
