#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "dia/matrix.hpp"
#include "dia/shap.hpp"

// Test-only reference implementations, kept independent of the estimators
// they check: the expectation below averages explicit per-row evaluations and
// the Shapley oracle enumerates all n! orderings with std::next_permutation.
namespace oracle {

inline double masked_mean(const dia::BatchModel& model, std::span<const double> instance,
                          const std::vector<bool>& active, const dia::BackgroundSet& background) {
    double acc = 0.0;
    for (std::size_t r = 0; r < background.count(); ++r) {
        dia::Matrix row(1, background.width());
        for (std::size_t j = 0; j < background.width(); ++j)
            row(0, j) = active[j] ? instance[j] : background.rows(r, j);
        acc += model.eval(row)(0, 0);
    }
    return acc / static_cast<double>(background.count());
}

inline std::vector<double> shap_all_permutations(const dia::BatchModel& model,
                                                 std::span<const double> instance,
                                                 const dia::BackgroundSet& background) {
    const std::size_t n = instance.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> phi(n, 0.0);
    std::size_t count = 0;
    do {
        std::vector<bool> active(n, false);
        double prev = masked_mean(model, instance, active, background);
        for (std::size_t j = 0; j < n; ++j) {
            active[order[j]] = true;
            const double cur = masked_mean(model, instance, active, background);
            phi[order[j]] += cur - prev;
            prev = cur;
        }
        ++count;
    } while (std::next_permutation(order.begin(), order.end()));

    for (double& v : phi) v /= static_cast<double>(count);
    return phi;
}

}  // namespace oracle
