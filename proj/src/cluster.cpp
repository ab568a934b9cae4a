#include "contab/cluster.hpp"

#include <map>

namespace contab {

int label_count(const std::vector<int>& labels) {
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw InputError("labels must be non-negative");
    k = std::max(k, l + 1);
  }
  return k;
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw InputError("adjusted_rand_index: labelings differ in length");
  const auto ca = canonical_labels(a);
  const auto cb = canonical_labels(b);
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    cells[{ca[i], cb[i]}] += 1.0;
    rows[ca[i]] += 1.0;
    cols[cb[i]] += 1.0;
  }
  auto pairs = [](double m) { return m * (m - 1.0) / 2.0; };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, m] : cells) index += pairs(m);
  for (const auto& [key, m] : rows) sum_a += pairs(m);
  for (const auto& [key, m] : cols) sum_b += pairs(m);
  const double total = pairs(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double maximum = 0.5 * (sum_a + sum_b);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

}  // namespace contab
