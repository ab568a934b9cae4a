#include "contab/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "contab/error.hpp"

namespace contab {

namespace fs = std::filesystem;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InputError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

void write_text_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dump_json(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

void write_json(const fs::path& path, const nlohmann::json& doc) { write_text_atomic(path, dump_json(doc)); }

nlohmann::json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].find_first_of(",\n\"") != std::string::npos) {
      throw InputError("csv cell contains a separator: " + cells[i]);
    }
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

std::string to_csv(const NamedTable& t) {
  std::vector<std::string> header{t.index_name};
  header.insert(header.end(), t.columns.begin(), t.columns.end());
  std::string out = csv_line(header);
  for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
    std::vector<std::string> cells{t.rows[static_cast<std::size_t>(r)]};
    for (Eigen::Index c = 0; c < t.values.cols(); ++c) cells.push_back(format_double(t.values(r, c)));
    out += csv_line(cells);
  }
  return out;
}

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  for (auto line : split_lines(text)) rows.push_back(split(line));
  return rows;
}

NamedTable parse_csv_table(std::string_view text, const std::string& what) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw InputError(what + ": empty CSV");
  NamedTable t;
  auto header = split(lines[0]);
  t.index_name = header[0];
  t.columns.assign(header.begin() + 1, header.end());
  t.values.resize(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto cells = split(lines[r]);
    if (cells.size() != header.size()) {
      throw InputError(what + ": line " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                       " cells, expected " + std::to_string(header.size()));
    }
    t.rows.push_back(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      try {
        t.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) = parse_double(cells[c]);
      } catch (const InputError& e) {
        throw InputError(what + ": line " + std::to_string(r + 1) + ": " + e.what());
      }
    }
  }
  return t;
}

NamedTable read_csv_table(const fs::path& path) { return parse_csv_table(read_text(path), path.string()); }

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

std::string sha256_tree(const fs::path& root) {
  std::vector<std::string> entries;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    entries.push_back(fs::relative(entry.path(), root).generic_string() + " " + sha256_file(entry.path()));
  }
  std::sort(entries.begin(), entries.end());
  std::string joined;
  for (const auto& e : entries) joined += e + "\n";
  return sha256_hex(joined);
}

}  // namespace contab
