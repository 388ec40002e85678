#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace unarysim {

using Cell = std::variant<int64_t, double, std::string>;

/// Rows of typed cells with one header; rendered as CSV, markdown or JSON lines.
struct RowTable {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

enum class OutputFormat { kCsv, kMarkdown, kJsonLines };

OutputFormat parse_output_format(const std::string& s);
void write_table(std::ostream& out, const RowTable& table, OutputFormat format);

}  // namespace unarysim
