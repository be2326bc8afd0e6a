#pragma once

// Tabular output with byte-stable CSV and JSON renderings.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hopfcone {

/// Locale-free rendering with 17 significant digits.
std::string format_double(double v);

/// 64-bit FNV-1a, rendered as 16 hex digits by hash_hex.
std::uint64_t fnv1a(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

class Table {
 public:
  using Cell = std::variant<double, std::int64_t, std::uint64_t, std::string>;

  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
  void add_row(std::vector<Cell> row);

  std::string to_csv() const;
  /// Array of objects keyed by column name, one object per line.
  std::string to_json() const;
  /// `name=value` pairs of one row, for console summaries.
  std::string summary(std::size_t row) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// Writes `text` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace hopfcone
