#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dia {

// Shortest decimal form that parses back to the exact same double.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& context);

struct SchemaHints {
    std::vector<std::string> numeric;
    std::vector<std::string> categorical;
    std::vector<std::string> missing_tokens = {"?"};
};

struct RawColumn {
    std::string name;
    bool numeric = false;
};

// Untyped-but-tagged table straight off a CSV file. Cells stay strings;
// numeric cells are validated on load.
struct RawTable {
    std::vector<RawColumn> columns;
    std::vector<std::vector<std::string>> rows;
    std::size_t missing_cells = 0;

    std::size_t column_index(const std::string& name) const;
};

// Requires a header row; every header name must be covered by the hints.
RawTable load_csv(const std::filesystem::path& path, const SchemaHints& hints);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace dia
