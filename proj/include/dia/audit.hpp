#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dia/dataset.hpp"
#include "dia/disentangle.hpp"
#include "dia/shap.hpp"

namespace dia {

// M'(p, x') = M(decode(p, x')): the decoder-wrapped audited model.
BatchModel build_disentangled_model(const DisentangledRep& rep, const BatchModel& model);

enum class DrSource { Learned, HandcraftedXY, Preloaded };

struct AuditPlan {
    std::vector<std::string> features;
    DrSource dr_source = DrSource::Learned;
    ShapConfig shap;
    DisentangleConfig dr;
    std::uint64_t master_seed = 0;
    std::size_t eval_count = 100;  // test-split rows audited (0 = all)
    bool include_direct = true;
    std::size_t jobs = 1;
    std::map<std::string, DisentangledRep> preloaded;

    void validate(const TabularDataset& data) const;
};

struct FeatureAudit {
    std::string feature;
    bool failed = false;
    std::string failure_reason;
    InfluenceValues influence;  // over (p, latents); column 0 is p
    ErrorReport errors;
    std::vector<double> eval_p;  // raw p value of each audited instance
    std::optional<DisentangledRep> rep;
};

struct AuditReport {
    std::vector<FeatureAudit> features;
    std::optional<InfluenceValues> direct;  // raw-feature audit
    std::size_t eval_count = 0;
    std::size_t background_count = 0;
};

using RepProvider =
    std::function<DisentangledRep(const TabularDataset&, const std::string&, const DisentangleConfig&)>;

// Per feature: obtain a representation, wrap the model behind its decoder,
// run direct influence in the disentangled space, attach error diagnostics.
// Features are independent work units; a custom provider overrides how
// representations are obtained (used for preloading and failure injection).
AuditReport disentangled_influence_audit(const TabularDataset& data, const BatchModel& model,
                                         const AuditPlan& plan, RepProvider provider = {});

InfluenceValues direct_influence_audit(const TabularDataset& data, const BatchModel& model,
                                       const ShapConfig& shap, std::size_t eval_count = 100);

struct SensitivityRecord {
    double dy_dp_total = 0.0;   // d/dp of M(decode(p, x')), x' fixed
    double dm_dp_direct = 0.0;  // d/dp of M at the reconstructed point
    bool one_sided = false;     // p at a domain boundary
};

SensitivityRecord sensitivity_decomposition(const DisentangledRep& rep, const BatchModel& model,
                                            std::span<const double> instance);

struct FeatureSummary {
    std::string feature;
    bool failed = false;
    double mean_abs_phi = 0.0;
    double max_abs_phi = 0.0;
    double mean_phi = 0.0;
    std::optional<double> disentanglement;
    bool constant_feature = false;
};

std::vector<FeatureSummary> aggregate_influence(const AuditReport& report);

// Per-column aggregates of any influence matrix (used for direct audits).
std::vector<FeatureSummary> aggregate_columns(const InfluenceValues& values);

}  // namespace dia
