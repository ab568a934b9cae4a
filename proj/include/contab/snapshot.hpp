#pragma once

#include <span>
#include <string>

#include <json.hpp>

#include "contab/tensor.hpp"

namespace contab {

inline constexpr const char* kSnapshotFormat = "contab.tensors";
inline constexpr int kSnapshotVersion = 1;

/// A named slot for serialization: parameters and buffers (running statistics) alike.
struct NamedTensor {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;

  NamedTensor(std::string n, Matrix& m) : name(std::move(n)), data(m.data()), rows(m.rows()), cols(m.cols()) {}
  NamedTensor(std::string n, RowVector& v) : name(std::move(n)), data(v.data()), rows(1), cols(v.cols()) {}

  Eigen::Map<Matrix> map() const { return Eigen::Map<Matrix>(data, rows, cols); }
};

/// {"format": "contab.tensors", "version": 1, "tensors": [{"name", "rows", "cols", "values"}]}
/// with values row-major. Doubles round-trip exactly.
nlohmann::json snapshot_to_json(std::span<const NamedTensor> tensors);

/// Fills every slot from `doc` by name. Throws InputError on a format or version
/// mismatch, a missing name, or a shape disagreement.
void snapshot_from_json(const nlohmann::json& doc, std::span<const NamedTensor> tensors);

}  // namespace contab
