#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dia/csv.hpp"
#include "dia/dataset.hpp"

namespace dia {

// Canonical UCI census income schema; the label column is "income".
const std::vector<std::string>& adult_column_names();
const SchemaHints& adult_schema_hints();

// The UCI files ship without a header row; the test file starts with a
// "|1x3 Cross validator" comment and labels carry a trailing period.
RawTable load_adult_raw(const std::filesystem::path& path);

struct PreprocessOptions {
    std::size_t rare_threshold = 1000;  // categorical values rarer than this are binned
    std::vector<std::string> drop_columns = {"education_num"};
    std::string label_column = "income";
    std::string positive_label = ">50K";
};

struct NumericStats {
    double mean = 0.0;
    double stddev = 1.0;
};

// Everything required to replay the fitted preprocessing on new raw rows.
struct PreprocessReport {
    PreprocessOptions options;
    std::vector<std::string> dropped_columns;
    std::map<std::string, NumericStats> numeric_stats;                 // per kept numeric column
    std::map<std::string, std::vector<std::string>> rare_values;       // per categorical column
    std::map<std::string, std::vector<std::string>> category_order;    // post-binning categories
    std::vector<Column> result_columns;
};

// Fits on the train table only, then applies to both splits.
std::pair<TabularDataset, PreprocessReport> preprocess_adult(const RawTable& train, const RawTable& test,
                                                             const PreprocessOptions& options = {});

// Replays a fitted report on a raw table; bit-identical to the fit-time output.
TabularDataset apply_preprocess(const PreprocessReport& report, const RawTable& raw, Split tag);

}  // namespace dia
