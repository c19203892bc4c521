#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dia/matrix.hpp"
#include "dia/nn.hpp"

namespace dia {

enum class ColumnKind { Numeric, OneHotMember };
enum class Task { Regression, BinaryClassification };
enum class Split { Train, Test };

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    std::string group;  // one-hot group; empty for numeric columns
};

struct TabularDataset {
    std::vector<Column> columns;
    Matrix values;               // all rows, both splits
    std::vector<double> labels;  // one per row
    Task task = Task::Regression;
    std::vector<Split> split;    // one tag per row

    std::size_t width() const { return columns.size(); }
    std::size_t rows() const { return values.rows; }

    std::size_t column_index(const std::string& name) const;
    std::vector<std::size_t> rows_of(Split s) const;
    Matrix matrix_of(Split s) const;
    std::vector<double> labels_of(Split s) const;

    void validate() const;
};

inline const std::vector<std::string>& xy_column_names() {
    static const std::vector<std::string> names = {"x", "2x", "x^2", "y", "2y", "y^2",
                                                   "c", "2c", "c^2"};
    return names;
}

// x, y, c independent uniform on [0,1]; label = x + y; proxy columns are exact
// algebraic transforms. First 80% of rows are tagged train, the rest test.
TabularDataset gen_xy_synthetic(std::size_t n, std::uint64_t seed);

// Single linear layer, weight 1 on the x and y columns, 0 elsewhere.
DenseNet xy_fixed_model();

// Fallback audit fixture: B is a noisy copy of A, C is independent noise,
// and the paired model reads only B. A carries purely indirect influence.
TabularDataset gen_proxy_fixture(std::size_t n, std::uint64_t seed);
DenseNet proxy_fixture_model();

}  // namespace dia
