#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergopt/grid.hpp"

namespace ergopt::io {

/// 17 significant digits: doubles round-trip exactly through the CSV files.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

/// CSV with a header row; every cell is a double formatted by format_double.
void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows);

/// Reads back a CSV written by write_csv (header skipped, exact doubles).
std::vector<std::vector<double>> read_csv(const std::filesystem::path& path,
                                          std::size_t expected_cols);

void write_json(const std::filesystem::path& path,
                const nlohmann::ordered_json& j);
nlohmann::ordered_json read_json(const std::filesystem::path& path);

/// FNV-1a over a byte string, reported as 16 hex digits. Keys the artifact
/// cache; not cryptographic.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace ergopt::io
