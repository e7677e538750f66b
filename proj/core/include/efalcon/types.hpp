#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace efalcon {

/// Arm index, 0-based in the API. Files and the CLI print arms 1-based.
using Arm = std::size_t;

/// A point in the context space. Built-in environments use a scalar in
/// (0, 1); the realizable environment allows several coordinates, each in
/// (0, 1).
class Context {
 public:
  Context() = default;
  explicit Context(double x) : values_{x} {}
  explicit Context(std::vector<double> values) : values_(std::move(values)) {}
  Context(std::initializer_list<double> values) : values_(values) {}

  std::size_t dim() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double scalar() const { return values_.front(); }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const Context&, const Context&) = default;

 private:
  std::vector<double> values_;
};

}  // namespace efalcon
