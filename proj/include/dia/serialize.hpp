#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "dia/adult.hpp"
#include "dia/dataset.hpp"
#include "dia/disentangle.hpp"
#include "dia/nn.hpp"
#include "dia/shap.hpp"

namespace dia {

using ordered_json = nlohmann::ordered_json;

// All structured-text bundles round-trip doubles exactly (shortest decimal).
ordered_json net_to_json(const DenseNet& net);
DenseNet net_from_json(const ordered_json& j);
void save_net(const std::filesystem::path& path, const DenseNet& net);
DenseNet load_net(const std::filesystem::path& path);

ordered_json rep_to_json(const DisentangledRep& rep);
DisentangledRep rep_from_json(const ordered_json& j);
void save_rep(const std::filesystem::path& path, const DisentangledRep& rep);
DisentangledRep load_rep(const std::filesystem::path& path);

ordered_json preprocess_report_to_json(const PreprocessReport& report);
PreprocessReport preprocess_report_from_json(const ordered_json& j);

// Dataset directory: schema.json plus train.csv/test.csv with a label column.
void save_dataset(const std::filesystem::path& dir, const TabularDataset& ds);
TabularDataset load_dataset(const std::filesystem::path& dir);

void save_influence_csv(const std::filesystem::path& path, const InfluenceValues& values);
InfluenceValues load_influence_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

void save_json(const std::filesystem::path& path, const ordered_json& j);
ordered_json load_json(const std::filesystem::path& path);

// SHA-256 of the file contents, lowercase hex.
std::string file_digest(const std::filesystem::path& path);

}  // namespace dia
