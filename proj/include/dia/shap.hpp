#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dia/matrix.hpp"
#include "dia/nn.hpp"

namespace dia {

// A scalar-output model evaluated on row batches. eval must be pure; the
// influence estimators call it concurrently from per-instance workers.
struct BatchModel {
    std::size_t input_width = 0;
    std::function<Matrix(const Matrix&)> eval;  // rows x input_width -> rows x 1
};

BatchModel net_model(DenseNet net);

struct BackgroundSet {
    Matrix rows;

    std::size_t count() const { return rows.rows; }
    std::size_t width() const { return rows.cols; }
};

enum class ShapMode { Exact, Permutation };

struct ShapConfig {
    ShapMode mode = ShapMode::Exact;
    std::size_t background_size = 50;
    std::size_t permutation_samples = 200;
    std::uint64_t seed = 0;
    std::size_t exact_width_limit = 12;

    void validate() const;
};

struct InfluenceValues {
    std::vector<std::string> feature_names;
    Matrix phi;          // instances x features
    Matrix std_errors;   // same shape; empty in exact mode
    double base_value = 0.0;  // mean model output over the background
};

// Average model output over the background with the columns in active_set
// overwritten by the instance's values (interventional semantics).
double masked_expectation(const BatchModel& model, std::span<const double> instance,
                          const std::vector<std::size_t>& active_set, const BackgroundSet& background);

InfluenceValues shap_exact(const BatchModel& model, std::span<const double> instance,
                           const BackgroundSet& background, const ShapConfig& cfg);

InfluenceValues shap_permutation(const BatchModel& model, std::span<const double> instance,
                                 const BackgroundSet& background, const ShapConfig& cfg);

InfluenceValues shap_batch(const BatchModel& model, const Matrix& instances, const BackgroundSet& background,
                           const ShapConfig& cfg);

}  // namespace dia
