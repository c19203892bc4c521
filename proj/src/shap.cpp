#include "dia/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "dia/rng.hpp"

namespace dia {

BatchModel net_model(DenseNet net) {
    if (net.output_dim() != 1) throw std::invalid_argument("net_model: influence needs a scalar output");
    auto shared = std::make_shared<DenseNet>(std::move(net));
    BatchModel m;
    m.input_width = shared->input_dim();
    m.eval = [shared](const Matrix& batch) { return forward(*shared, batch); };
    return m;
}

void ShapConfig::validate() const {
    if (mode == ShapMode::Permutation && permutation_samples < 1)
        throw std::invalid_argument("permutation_samples must be >= 1");
    if (background_size < 1) throw std::invalid_argument("background_size must be >= 1");
}

namespace {

void check_widths(const BatchModel& model, std::span<const double> instance, const BackgroundSet& background) {
    if (background.count() < 1) throw std::invalid_argument("background set is empty");
    if (background.width() != model.input_width)
        throw std::invalid_argument("background width does not match model input");
    if (instance.size() != model.input_width)
        throw std::invalid_argument("instance width does not match model input");
}

double mean_output(const BatchModel& model, const Matrix& batch) {
    Matrix out = model.eval(batch);
    require_shape(out, batch.rows, 1, "model output");
    double sum = std::accumulate(out.data.begin(), out.data.end(), 0.0);
    return sum / static_cast<double>(out.rows);
}

// Background copy with the active columns overwritten by the instance.
void fill_masked(Matrix& scratch, const BackgroundSet& background, std::span<const double> instance,
                 const std::vector<std::uint8_t>& active) {
    scratch = background.rows;
    for (std::size_t j = 0; j < instance.size(); ++j) {
        if (!active[j]) continue;
        for (std::size_t i = 0; i < scratch.rows; ++i) scratch(i, j) = instance[j];
    }
}

// Permutation estimates draw their stream from the instance content, so a
// batch reordering moves values with their rows instead of reshuffling them.
std::uint64_t instance_salt(std::span<const double> instance) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (double v : instance) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffu;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

}  // namespace

double masked_expectation(const BatchModel& model, std::span<const double> instance,
                          const std::vector<std::size_t>& active_set, const BackgroundSet& background) {
    check_widths(model, instance, background);
    std::vector<std::uint8_t> active(instance.size(), 0);
    for (std::size_t j : active_set) {
        if (j >= instance.size()) throw std::invalid_argument("active set index past instance width");
        active[j] = 1;
    }
    Matrix scratch;
    fill_masked(scratch, background, instance, active);
    return mean_output(model, scratch);
}

InfluenceValues shap_exact(const BatchModel& model, std::span<const double> instance,
                           const BackgroundSet& background, const ShapConfig& cfg) {
    cfg.validate();
    check_widths(model, instance, background);
    const std::size_t n = instance.size();
    if (n > cfg.exact_width_limit)
        throw std::invalid_argument("shap_exact: " + std::to_string(n) + " features exceed exact_width_limit " +
                                    std::to_string(cfg.exact_width_limit) + "; use permutation mode");

    // v[mask] = conditional expectation with the masked features fixed.
    const std::uint64_t subsets = std::uint64_t{1} << n;
    std::vector<double> v(subsets);
    Matrix scratch;
    std::vector<std::uint8_t> active(n, 0);
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
        for (std::size_t j = 0; j < n; ++j) active[j] = (mask >> j) & 1u;
        fill_masked(scratch, background, instance, active);
        v[mask] = mean_output(model, scratch);
    }

    // weight(k) = k! (n-k-1)! / n!, in log form
    std::vector<double> weight(n);
    for (std::size_t k = 0; k < n; ++k)
        weight[k] = std::exp(std::lgamma(static_cast<double>(k) + 1.0) +
                             std::lgamma(static_cast<double>(n - k)) -
                             std::lgamma(static_cast<double>(n) + 1.0));

    InfluenceValues out;
    out.phi = Matrix(1, n);
    out.base_value = v[0];
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t bit = std::uint64_t{1} << i;
        double phi = 0.0;
        for (std::uint64_t mask = 0; mask < subsets; ++mask) {
            if (mask & bit) continue;
            phi += weight[static_cast<std::size_t>(std::popcount(mask))] * (v[mask | bit] - v[mask]);
        }
        out.phi(0, i) = phi;
    }
    return out;
}

InfluenceValues shap_permutation(const BatchModel& model, std::span<const double> instance,
                                 const BackgroundSet& background, const ShapConfig& cfg) {
    cfg.validate();
    check_widths(model, instance, background);
    const std::size_t n = instance.size();
    const std::size_t samples = cfg.permutation_samples;

    Rng rng(derive_seed(cfg.seed, instance_salt(instance)));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
    Matrix scratch;
    std::vector<std::uint8_t> active(n, 0);

    fill_masked(scratch, background, instance, active);
    const double base = mean_output(model, scratch);

    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t j = n; j > 1; --j) std::swap(perm[j - 1], perm[rng.index(j)]);
        double prev = base;
        scratch = background.rows;  // walk the permutation by one column overwrite per step
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t col = perm[j];
            for (std::size_t r = 0; r < scratch.rows; ++r) scratch(r, col) = instance[col];
            const double cur = mean_output(model, scratch);
            const double contrib = cur - prev;
            sum[col] += contrib;
            sumsq[col] += contrib * contrib;
            prev = cur;
        }
    }

    InfluenceValues out;
    out.base_value = base;
    out.phi = Matrix(1, n);
    out.std_errors = Matrix(1, n);
    const double m = static_cast<double>(samples);
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = sum[i] / m;
        out.phi(0, i) = mean;
        if (samples > 1) {
            const double var = std::max(0.0, (sumsq[i] - m * mean * mean) / (m - 1.0));
            out.std_errors(0, i) = std::sqrt(var / m);
        }
    }
    return out;
}

InfluenceValues shap_batch(const BatchModel& model, const Matrix& instances, const BackgroundSet& background,
                           const ShapConfig& cfg) {
    cfg.validate();
    if (instances.rows == 0) throw std::invalid_argument("shap_batch: no instances");
    InfluenceValues out;
    out.phi = Matrix(instances.rows, instances.cols);
    if (cfg.mode == ShapMode::Permutation) out.std_errors = Matrix(instances.rows, instances.cols);
    for (std::size_t i = 0; i < instances.rows; ++i) {
        InfluenceValues one = cfg.mode == ShapMode::Exact
                                  ? shap_exact(model, instances.row(i), background, cfg)
                                  : shap_permutation(model, instances.row(i), background, cfg);
        for (std::size_t j = 0; j < instances.cols; ++j) {
            out.phi(i, j) = one.phi(0, j);
            if (cfg.mode == ShapMode::Permutation) out.std_errors(i, j) = one.std_errors(0, j);
        }
        out.base_value = one.base_value;
    }
    return out;
}

}  // namespace dia
