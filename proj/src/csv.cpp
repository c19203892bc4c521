#include "dia/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace dia {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw std::runtime_error(context + ": cannot parse '" + s + "' as a number");
    return v;
}

std::size_t RawTable::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
        if (columns[j].name == name) return j;
    throw std::invalid_argument("raw table has no column '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

RawTable load_csv(const std::filesystem::path& path, const SchemaHints& hints) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + path.string() + "' is empty");

    RawTable table;
    const std::unordered_set<std::string> numeric(hints.numeric.begin(), hints.numeric.end());
    const std::unordered_set<std::string> categorical(hints.categorical.begin(), hints.categorical.end());
    const std::unordered_set<std::string> missing(hints.missing_tokens.begin(), hints.missing_tokens.end());

    for (const std::string& name : split_csv_line(line)) {
        if (numeric.count(name)) {
            table.columns.push_back({name, true});
        } else if (categorical.count(name)) {
            table.columns.push_back({name, false});
        } else {
            throw std::runtime_error("'" + path.string() + "': unknown column '" + name + "'");
        }
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != table.columns.size())
            throw std::runtime_error("'" + path.string() + "' line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(table.columns.size()) + " fields, got " +
                                     std::to_string(cells.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (missing.count(cells[j])) {
                ++table.missing_cells;
                continue;
            }
            if (table.columns[j].numeric)
                parse_double(cells[j], "'" + path.string() + "' line " + std::to_string(line_no) + ", column '" +
                                           table.columns[j].name + "'");
        }
        table.rows.push_back(std::move(cells));
    }
    if (table.rows.empty())
        throw std::runtime_error("'" + path.string() + "' has a header but no data rows");
    return table;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j) out << ',';
            out << cells[j];
        }
        out << '\n';
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace dia
