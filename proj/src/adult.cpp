#include "dia/adult.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace dia {

const std::vector<std::string>& adult_column_names() {
    static const std::vector<std::string> names = {
        "age",          "workclass",     "fnlwgt",       "education",      "education_num",
        "marital_status", "occupation",  "relationship", "race",           "sex",
        "capital_gain", "capital_loss",  "hours_per_week", "native_country", "income"};
    return names;
}

const SchemaHints& adult_schema_hints() {
    static const SchemaHints hints = {
        {"age", "fnlwgt", "education_num", "capital_gain", "capital_loss", "hours_per_week"},
        {"workclass", "education", "marital_status", "occupation", "relationship", "race", "sex",
         "native_country", "income"},
        {"?"}};
    return hints;
}

RawTable load_adult_raw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");

    RawTable table;
    const SchemaHints& hints = adult_schema_hints();
    for (const std::string& name : adult_column_names()) {
        const bool numeric = std::find(hints.numeric.begin(), hints.numeric.end(), name) != hints.numeric.end();
        table.columns.push_back({name, numeric});
    }

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '|') continue;  // test file comment line
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() == 1 && cells[0].empty()) continue;
        if (cells.size() != table.columns.size())
            throw std::runtime_error("'" + path.string() + "' line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(table.columns.size()) + " fields, got " +
                                     std::to_string(cells.size()));
        // adult.test labels end in '.'
        std::string& label = cells.back();
        if (!label.empty() && label.back() == '.') label.pop_back();
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (cells[j] == "?") {
                ++table.missing_cells;
                continue;
            }
            if (table.columns[j].numeric)
                parse_double(cells[j], "'" + path.string() + "' line " + std::to_string(line_no) + ", column '" +
                                           table.columns[j].name + "'");
        }
        table.rows.push_back(std::move(cells));
    }
    if (table.rows.empty()) throw std::runtime_error("'" + path.string() + "' contains no data rows");
    return table;
}

namespace {

std::string binned(const PreprocessReport& report, const std::string& column, const std::string& value) {
    auto it = report.rare_values.find(column);
    if (it != report.rare_values.end() &&
        std::find(it->second.begin(), it->second.end(), value) != it->second.end())
        return "rare_value";
    return value;
}

}  // namespace

std::pair<TabularDataset, PreprocessReport> preprocess_adult(const RawTable& train, const RawTable& test,
                                                             const PreprocessOptions& options) {
    if (train.columns.size() != test.columns.size())
        throw std::invalid_argument("preprocess_adult: train/test column mismatch");
    for (std::size_t j = 0; j < train.columns.size(); ++j)
        if (train.columns[j].name != test.columns[j].name)
            throw std::invalid_argument("preprocess_adult: train/test column name mismatch at " + std::to_string(j));

    PreprocessReport report;
    report.options = options;

    const std::size_t label_idx = train.column_index(options.label_column);

    auto dropped = [&](const std::string& name) {
        return std::find(options.drop_columns.begin(), options.drop_columns.end(), name) !=
               options.drop_columns.end();
    };

    for (std::size_t j = 0; j < train.columns.size(); ++j) {
        const RawColumn& col = train.columns[j];
        if (j == label_idx) continue;
        if (dropped(col.name)) {
            report.dropped_columns.push_back(col.name);
            continue;
        }
        if (col.numeric) {
            double sum = 0.0;
            for (const auto& row : train.rows) sum += parse_double(row[j], col.name);
            const double mean = sum / static_cast<double>(train.rows.size());
            double sq = 0.0;
            for (const auto& row : train.rows) {
                const double d = parse_double(row[j], col.name) - mean;
                sq += d * d;
            }
            const double stddev = std::sqrt(sq / static_cast<double>(train.rows.size()));
            if (stddev == 0.0)
                throw std::runtime_error("preprocess_adult: numeric column '" + col.name + "' is constant");
            report.numeric_stats[col.name] = {mean, stddev};
            report.result_columns.push_back({col.name, ColumnKind::Numeric, ""});
        } else {
            // Counts on the train split only; missing "?" counts as a value of its own.
            std::unordered_map<std::string, std::size_t> counts;
            std::vector<std::string> first_seen;
            for (const auto& row : train.rows) {
                if (counts.emplace(row[j], 0).second) first_seen.push_back(row[j]);
                ++counts[row[j]];
            }
            std::vector<std::string> rare;
            std::vector<std::string> kept;
            bool any_rare = false;
            for (const std::string& v : first_seen) {
                if (counts[v] < options.rare_threshold) {
                    rare.push_back(v);
                    any_rare = true;
                } else {
                    kept.push_back(v);
                }
            }
            std::sort(rare.begin(), rare.end());
            std::sort(kept.begin(), kept.end());
            if (any_rare) kept.push_back("rare_value");
            if (kept.size() < 2)
                throw std::runtime_error("preprocess_adult: categorical column '" + col.name +
                                         "' collapses to a single value");
            report.rare_values[col.name] = rare;
            report.category_order[col.name] = kept;
            for (const std::string& v : kept)
                report.result_columns.push_back({col.name + "=" + v, ColumnKind::OneHotMember, col.name});
        }
    }

    TabularDataset train_ds = apply_preprocess(report, train, Split::Train);
    TabularDataset test_ds = apply_preprocess(report, test, Split::Test);

    TabularDataset merged = std::move(train_ds);
    merged.values.data.insert(merged.values.data.end(), test_ds.values.data.begin(), test_ds.values.data.end());
    merged.values.rows += test_ds.values.rows;
    merged.labels.insert(merged.labels.end(), test_ds.labels.begin(), test_ds.labels.end());
    merged.split.insert(merged.split.end(), test_ds.split.begin(), test_ds.split.end());
    merged.validate();
    return {std::move(merged), std::move(report)};
}

TabularDataset apply_preprocess(const PreprocessReport& report, const RawTable& raw, Split tag) {
    TabularDataset ds;
    ds.columns = report.result_columns;
    ds.task = Task::BinaryClassification;
    ds.values = Matrix(raw.rows.size(), report.result_columns.size());
    ds.labels.resize(raw.rows.size());
    ds.split.assign(raw.rows.size(), tag);

    const std::size_t label_idx = raw.column_index(report.options.label_column);

    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        const auto& row = raw.rows[i];
        std::size_t out_j = 0;
        for (std::size_t j = 0; j < raw.columns.size(); ++j) {
            const RawColumn& col = raw.columns[j];
            if (j == label_idx) continue;
            if (std::find(report.dropped_columns.begin(), report.dropped_columns.end(), col.name) !=
                report.dropped_columns.end())
                continue;
            if (col.numeric) {
                const NumericStats& st = report.numeric_stats.at(col.name);
                ds.values(i, out_j) = (parse_double(row[j], col.name) - st.mean) / st.stddev;
                ++out_j;
            } else {
                const std::vector<std::string>& cats = report.category_order.at(col.name);
                const std::string v = binned(report, col.name, row[j]);
                auto it = std::find(cats.begin(), cats.end(), v);
                // unseen test-split values fall into rare_value
                if (it == cats.end()) it = std::find(cats.begin(), cats.end(), "rare_value");
                if (it == cats.end())
                    throw std::runtime_error("apply_preprocess: value '" + row[j] + "' in column '" + col.name +
                                             "' was never seen in training and no rare bin exists");
                for (std::size_t k = 0; k < cats.size(); ++k) ds.values(i, out_j + k) = 0.0;
                ds.values(i, out_j + static_cast<std::size_t>(it - cats.begin())) = 1.0;
                out_j += cats.size();
            }
        }
        ds.labels[i] = row[label_idx] == report.options.positive_label ? 1.0 : 0.0;
    }
    ds.validate();
    return ds;
}

}  // namespace dia
