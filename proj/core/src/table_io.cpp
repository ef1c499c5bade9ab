#include "qtm/table_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qtm/version.hpp"

namespace qtm {

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os << content;
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::string render_csv(const TableMeta& meta, const Table& table) {
  std::ostringstream os;
  os << "# tool: " << meta.tool << "\n";
  os << "# format: " << kTableFormatVersion << "\n";
  for (const auto& [k, v] : meta.config) os << "# " << k << ": " << v << "\n";
  for (size_t c = 0; c < table.columns.size(); ++c)
    os << table.columns[c] << (c + 1 < table.columns.size() ? "," : "");
  os << "\n";
  for (const auto& row : table.rows) {
    for (size_t c = 0; c < row.size(); ++c) os << format_value(row[c]) << (c + 1 < row.size() ? "," : "");
    os << "\n";
  }
  return os.str();
}

std::string render_json(const TableMeta& meta, const Table& table) {
  nlohmann::json j;
  j["meta"]["tool"] = meta.tool;
  j["meta"]["format"] = kTableFormatVersion;
  for (const auto& [k, v] : meta.config) j["meta"]["config"][k] = v;
  j["columns"] = table.columns;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows) j["rows"].push_back(row);
  return j.dump(2) + "\n";
}

void write_csv(const std::filesystem::path& path, const TableMeta& meta, const Table& table) {
  write_atomic(path, render_csv(meta, table));
}

void write_json(const std::filesystem::path& path, const TableMeta& meta, const Table& table) {
  write_atomic(path, render_json(meta, table));
}

}  // namespace qtm
