#include "contab/snapshot.hpp"

#include <map>

#include "contab/error.hpp"

namespace contab {

nlohmann::json snapshot_to_json(std::span<const NamedTensor> tensors) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& t : tensors) {
    const auto m = t.map();
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
    }
    list.push_back({{"name", t.name}, {"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(values)}});
  }
  return {{"format", kSnapshotFormat}, {"version", kSnapshotVersion}, {"tensors", std::move(list)}};
}

void snapshot_from_json(const nlohmann::json& doc, std::span<const NamedTensor> tensors) {
  if (doc.value("format", "") != kSnapshotFormat) throw InputError("snapshot: unrecognized format");
  if (doc.value("version", 0) != kSnapshotVersion) {
    throw InputError("snapshot: unsupported version " + doc.value("version", nlohmann::json()).dump());
  }
  std::map<std::string, const nlohmann::json*> by_name;
  for (const auto& entry : doc.at("tensors")) by_name[entry.at("name").get<std::string>()] = &entry;

  for (const auto& t : tensors) {
    auto it = by_name.find(t.name);
    if (it == by_name.end()) throw InputError("snapshot: missing tensor " + t.name);
    const auto& entry = *it->second;
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    if (rows != t.rows || cols != t.cols) {
      throw InputError("snapshot: shape mismatch for " + t.name);
    }
    const auto values = entry.at("values").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != rows * cols) throw InputError("snapshot: value count mismatch for " + t.name);
    auto target = t.map();
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) target(r, c) = values[static_cast<std::size_t>(r * cols + c)];
    }
  }
}

}  // namespace contab
