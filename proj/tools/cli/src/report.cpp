#include "multitime_cli/report.hpp"

#include <cstdio>
#include <ostream>

namespace multitime::cli {

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string format_number(std::size_t value) { return std::to_string(value); }

void write_csv(std::ostream& out, const CsvTable& table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
}

json vector_json(const std::vector<double>& values) { return json(values); }

json matrix_json(const std::vector<std::vector<double>>& values) { return json(values); }

}  // namespace multitime::cli
