#include "dia/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "dia/rng.hpp"

namespace dia {

std::size_t TabularDataset::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
        if (columns[j].name == name) return j;
    throw std::invalid_argument("unknown column '" + name + "'");
}

std::vector<std::size_t> TabularDataset::rows_of(Split s) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == s) idx.push_back(i);
    return idx;
}

Matrix TabularDataset::matrix_of(Split s) const { return values.gather_rows(rows_of(s)); }

std::vector<double> TabularDataset::labels_of(Split s) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == s) out.push_back(labels[i]);
    return out;
}

void TabularDataset::validate() const {
    if (values.cols != columns.size()) throw std::invalid_argument("dataset: column count mismatch");
    if (labels.size() != values.rows) throw std::invalid_argument("dataset: label length mismatch");
    if (split.size() != values.rows) throw std::invalid_argument("dataset: split tag length mismatch");
    std::unordered_set<std::string> seen;
    for (const Column& c : columns)
        if (!seen.insert(c.name).second) throw std::invalid_argument("dataset: duplicate column '" + c.name + "'");
}

TabularDataset gen_xy_synthetic(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_xy_synthetic: n must be >= 1");
    TabularDataset ds;
    for (const std::string& name : xy_column_names()) ds.columns.push_back({name, ColumnKind::Numeric, ""});
    ds.task = Task::Regression;
    ds.values = Matrix(n, 9);
    ds.labels.resize(n);
    ds.split.resize(n);

    Rng rng(seed);
    const std::size_t train_rows = (n * 8 + 9) / 10;  // ceil(0.8 n)
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform01();
        const double y = rng.uniform01();
        const double c = rng.uniform01();
        ds.values(i, 0) = x;
        ds.values(i, 1) = 2.0 * x;
        ds.values(i, 2) = x * x;
        ds.values(i, 3) = y;
        ds.values(i, 4) = 2.0 * y;
        ds.values(i, 5) = y * y;
        ds.values(i, 6) = c;
        ds.values(i, 7) = 2.0 * c;
        ds.values(i, 8) = c * c;
        ds.labels[i] = x + y;
        ds.split[i] = i < train_rows ? Split::Train : Split::Test;
    }
    return ds;
}

DenseNet xy_fixed_model() {
    DenseNet net;
    Layer l;
    l.weights = Matrix(9, 1);
    l.weights(0, 0) = 1.0;  // x
    l.weights(3, 0) = 1.0;  // y
    l.bias = {0.0};
    l.activation = Activation::Linear;
    net.layers.push_back(std::move(l));
    return net;
}

TabularDataset gen_proxy_fixture(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_proxy_fixture: n must be >= 1");
    TabularDataset ds;
    ds.columns = {{"A", ColumnKind::Numeric, ""}, {"B", ColumnKind::Numeric, ""}, {"C", ColumnKind::Numeric, ""}};
    ds.task = Task::Regression;
    ds.values = Matrix(n, 3);
    ds.labels.resize(n);
    ds.split.resize(n);

    Rng rng(seed);
    const std::size_t train_rows = (n * 8 + 9) / 10;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform01();
        const double b = a + rng.uniform(-0.05, 0.05);
        const double c = rng.uniform01();
        ds.values(i, 0) = a;
        ds.values(i, 1) = b;
        ds.values(i, 2) = c;
        ds.labels[i] = b;
        ds.split[i] = i < train_rows ? Split::Train : Split::Test;
    }
    return ds;
}

DenseNet proxy_fixture_model() {
    DenseNet net;
    Layer l;
    l.weights = Matrix(3, 1);
    l.weights(1, 0) = 1.0;  // B only
    l.bias = {0.0};
    l.activation = Activation::Linear;
    net.layers.push_back(std::move(l));
    return net;
}

}  // namespace dia
