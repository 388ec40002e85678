#include "unarysim/table.hpp"

#include <ostream>

#include <json.hpp>

#include "unarysim/error.hpp"
#include "unarysim/format.hpp"

namespace unarysim {
namespace {

std::string render(const Cell& c) {
  if (const auto* i = std::get_if<int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  return std::get<std::string>(c);
}

}  // namespace

OutputFormat parse_output_format(const std::string& s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "markdown" || s == "md") return OutputFormat::kMarkdown;
  if (s == "jsonl" || s == "json-lines") return OutputFormat::kJsonLines;
  throw ValidationError("unknown output format '" + s + "' (csv, markdown, jsonl)");
}

void write_table(std::ostream& out, const RowTable& table, OutputFormat format) {
  switch (format) {
    case OutputFormat::kCsv: {
      for (size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
      out << "\n";
      for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << render(row[i]);
        out << "\n";
      }
      break;
    }
    case OutputFormat::kMarkdown: {
      out << "|";
      for (const auto& h : table.header) out << " " << h << " |";
      out << "\n|";
      for (size_t i = 0; i < table.header.size(); ++i) out << "---|";
      out << "\n";
      for (const auto& row : table.rows) {
        out << "|";
        for (const auto& c : row) out << " " << render(c) << " |";
        out << "\n";
      }
      break;
    }
    case OutputFormat::kJsonLines: {
      for (const auto& row : table.rows) {
        nlohmann::ordered_json j;
        for (size_t i = 0; i < row.size() && i < table.header.size(); ++i) {
          std::visit([&](const auto& v) { j[table.header[i]] = v; }, row[i]);
        }
        out << j.dump() << "\n";
      }
      break;
    }
  }
}

}  // namespace unarysim
