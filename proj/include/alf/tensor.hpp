#pragma once

#include <string>
#include <utility>
#include <vector>

#include "alf/jet.hpp"

namespace alf {

constexpr int ix(int a, int b) { return 4 * a + b; }
constexpr int ix(int a, int b, int c) { return 16 * a + 4 * b + c; }
constexpr int ix(int a, int b, int c, int d) { return 64 * a + 16 * b + 4 * c + d; }

// Chart-basis components of a tensor. slots holds one character per index:
// 'd' for a covariant slot, 'u' for a contravariant one.
struct TensorValue {
  std::string slots;
  std::vector<JetScalar> comp;
  std::string chart_id;

  TensorValue() = default;
  TensorValue(std::string s, int order, std::string chart = {});

  int rank() const { return static_cast<int>(slots.size()); }
  // (covariant count, contravariant count)
  std::pair<int, int> valence() const;
  int order() const;
  JetScalar& operator[](int i) { return comp[i]; }
  const JetScalar& operator[](int i) const { return comp[i]; }
  // component values at the point
  std::vector<double> values() const;
  // max |component| at the point
  double max_abs() const;
};

// Levi-Civita symbol [abcd] with [0123] = +1
int permutation_sign(int a, int b, int c, int d);

}  // namespace alf
