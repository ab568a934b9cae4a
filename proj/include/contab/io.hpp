#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace contab {

/// Shortest text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Write via a sibling temp file and rename, creating parent directories.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);
/// Throws InputError if the file cannot be read.
std::string read_text(const std::filesystem::path& path);

/// Two-space indented, keys sorted, trailing newline.
std::string dump_json(const nlohmann::json& doc);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

/// A CSV with a leading name column and numeric cells.
struct NamedTable {
  std::string index_name = "cohort";
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  Eigen::MatrixXd values;
};

std::string to_csv(const NamedTable& table);
NamedTable parse_csv_table(std::string_view text, const std::string& what = "table");
NamedTable read_csv_table(const std::filesystem::path& path);

/// Raw cells per non-empty line.
std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text);

/// Plain CSV rows; no quoting support beyond rejecting embedded commas.
std::string csv_line(const std::vector<std::string>& cells);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);
/// Digest over sorted relative paths and file digests of every regular file under root.
std::string sha256_tree(const std::filesystem::path& root);

}  // namespace contab
