#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace qtm {

/// Key/value pairs echoed into every output header: the resolved
/// configuration plus the format-version string.
struct TableMeta {
  std::string tool;
  std::vector<std::pair<std::string, std::string>> config;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// CSV with '#'-prefixed header comments. Written atomically (temp + rename);
/// rerunning with the same configuration is bit-identical.
void write_csv(const std::filesystem::path& path, const TableMeta& meta, const Table& table);

/// JSON alternative: {"meta": {...}, "columns": [...], "rows": [[...], ...]}.
void write_json(const std::filesystem::path& path, const TableMeta& meta, const Table& table);

std::string render_csv(const TableMeta& meta, const Table& table);
std::string render_json(const TableMeta& meta, const Table& table);

}  // namespace qtm
