#include "alf/tensor.hpp"

#include <cmath>

namespace alf {

TensorValue::TensorValue(std::string s, int order, std::string chart)
    : slots(std::move(s)), chart_id(std::move(chart)) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < slots.size(); ++i) n *= 4;
  comp.assign(n, JetScalar(0.0, order));
}

std::pair<int, int> TensorValue::valence() const {
  int p = 0, q = 0;
  for (char c : slots) (c == 'd' ? p : q)++;
  return {p, q};
}

int TensorValue::order() const { return comp.empty() ? 0 : comp.front().order(); }

std::vector<double> TensorValue::values() const {
  std::vector<double> v;
  v.reserve(comp.size());
  for (const auto& c : comp) v.push_back(c.value());
  return v;
}

double TensorValue::max_abs() const {
  double m = 0.0;
  for (const auto& c : comp) m = std::max(m, std::abs(c.value()));
  return m;
}

int permutation_sign(int a, int b, int c, int d) {
  int p[4] = {a, b, c, d};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] == p[j]) return 0;
  int s = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] > p[j]) s = -s;
  return s;
}

}  // namespace alf
