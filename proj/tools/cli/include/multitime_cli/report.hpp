#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "multitime_cli/config_reader.hpp"

namespace multitime::cli {

inline constexpr int kCsvVersion = 1;

struct CsvTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

/// Shortest round-trip decimal form ("%.17g").
std::string format_number(double value);
std::string format_number(std::size_t value);

void write_csv(std::ostream& out, const CsvTable& table);

json vector_json(const std::vector<double>& values);
json matrix_json(const std::vector<std::vector<double>>& values);

}  // namespace multitime::cli
