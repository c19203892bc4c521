#include "dia/audit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <set>
#include <stdexcept>
#include <thread>

#include "dia/rng.hpp"

namespace dia {

BatchModel build_disentangled_model(const DisentangledRep& rep, const BatchModel& model) {
    if (model.input_width != rep.input_width())
        throw std::invalid_argument("build_disentangled_model: decoder output width " +
                                    std::to_string(rep.input_width()) + " != model input " +
                                    std::to_string(model.input_width));
    auto shared_rep = std::make_shared<DisentangledRep>(rep);
    BatchModel wrapped;
    wrapped.input_width = 1 + rep.latent_dim();
    wrapped.eval = [shared_rep, model](const Matrix& batch) {
        return model.eval(decode_joined(*shared_rep, batch));
    };
    return wrapped;
}

void AuditPlan::validate(const TabularDataset& data) const {
    if (features.empty()) throw std::invalid_argument("audit plan has no features");
    std::set<std::string> seen;
    for (const std::string& f : features) {
        if (!seen.insert(f).second) throw std::invalid_argument("audit plan repeats feature '" + f + "'");
        data.column_index(f);  // throws on unknown columns
    }
    if (dr_source == DrSource::Preloaded)
        for (const std::string& f : features)
            if (!preloaded.count(f))
                throw std::invalid_argument("no preloaded representation for feature '" + f + "'");
}

namespace {

std::vector<std::size_t> eval_rows(const TabularDataset& data, std::size_t eval_count) {
    std::vector<std::size_t> rows = data.rows_of(Split::Test);
    if (rows.empty()) throw std::invalid_argument("audit: dataset has no test rows");
    if (eval_count > 0 && rows.size() > eval_count) rows.resize(eval_count);
    return rows;
}

BackgroundSet make_background(const TabularDataset& data, std::size_t background_size) {
    std::vector<std::size_t> rows = data.rows_of(Split::Train);
    if (rows.empty()) throw std::invalid_argument("audit: dataset has no train rows");
    if (rows.size() > background_size) rows.resize(background_size);
    return BackgroundSet{data.values.gather_rows(rows)};
}

std::vector<std::string> disentangled_names(const DisentangledRep& rep) {
    std::vector<std::string> names;
    names.push_back(rep.feature);
    for (std::size_t k = 0; k < rep.latent_dim(); ++k) names.push_back("latent_" + std::to_string(k));
    return names;
}

FeatureAudit audit_one_feature(const TabularDataset& data, const BatchModel& model, const AuditPlan& plan,
                               const RepProvider& provider, const std::string& feature,
                               const Matrix& eval_x, const BackgroundSet& raw_background) {
    FeatureAudit out;
    out.feature = feature;
    try {
        DisentangleConfig cfg = plan.dr;
        cfg.seed = derive_seed(plan.master_seed, "dr:" + feature);
        DisentangledRep rep = provider(data, feature, cfg);

        // audit in the disentangled space, background encoded under the same rep
        const Matrix eval_enc = encode(rep, eval_x);
        BackgroundSet enc_background{encode(rep, raw_background.rows)};
        BatchModel wrapped = build_disentangled_model(rep, model);

        ShapConfig shap = plan.shap;
        shap.seed = derive_seed(plan.master_seed, "shap:" + feature);
        out.influence = shap_batch(wrapped, eval_enc, enc_background, shap);
        out.influence.feature_names = disentangled_names(rep);
        out.errors = error_report(rep, model, data);
        out.eval_p = eval_enc.column(0);
        out.rep = std::move(rep);
    } catch (const TrainingDivergence& e) {
        out.failed = true;
        out.failure_reason = e.what();
    } catch (const std::exception& e) {
        // per-feature problems (e.g. a mismatched preloaded bundle) must not
        // tear down sibling audits running on worker threads
        out.failed = true;
        out.failure_reason = e.what();
    }
    return out;
}

double central_difference(const std::function<double(double)>& f, double at, double h, bool& one_sided,
                          bool nonnegative_domain) {
    if (nonnegative_domain && at - h < 0.0) {
        one_sided = true;
        return (f(at + h) - f(at)) / h;
    }
    return (f(at + h) - f(at - h)) / (2.0 * h);
}

}  // namespace

AuditReport disentangled_influence_audit(const TabularDataset& data, const BatchModel& model,
                                         const AuditPlan& plan, RepProvider provider) {
    plan.validate(data);
    if (model.input_width != data.width())
        throw std::invalid_argument("audit: model width does not match dataset");

    if (!provider) {
        switch (plan.dr_source) {
            case DrSource::Learned:
                provider = [](const TabularDataset& d, const std::string& p, const DisentangleConfig& cfg) {
                    return train_adversarial(d, p, cfg);
                };
                break;
            case DrSource::HandcraftedXY:
                provider = [](const TabularDataset&, const std::string& p, const DisentangleConfig&) {
                    return handcrafted_xy_rep(p);
                };
                break;
            case DrSource::Preloaded:
                provider = [&plan](const TabularDataset&, const std::string& p, const DisentangleConfig&) {
                    return plan.preloaded.at(p);
                };
                break;
        }
    }

    const std::vector<std::size_t> rows = eval_rows(data, plan.eval_count);
    const Matrix eval_x = data.values.gather_rows(rows);
    const BackgroundSet background = make_background(data, plan.shap.background_size);

    AuditReport report;
    report.eval_count = rows.size();
    report.background_count = background.count();
    report.features.resize(plan.features.size());

    const std::size_t jobs = std::max<std::size_t>(1, plan.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < plan.features.size(); ++i)
            report.features[i] =
                audit_one_feature(data, model, plan, provider, plan.features[i], eval_x, background);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= plan.features.size()) return;
                report.features[i] =
                    audit_one_feature(data, model, plan, provider, plan.features[i], eval_x, background);
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min(jobs, plan.features.size()); ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    if (plan.include_direct) {
        ShapConfig shap = plan.shap;
        shap.seed = derive_seed(plan.master_seed, "shap:direct");
        report.direct = direct_influence_audit(data, model, shap, plan.eval_count);
    }
    return report;
}

InfluenceValues direct_influence_audit(const TabularDataset& data, const BatchModel& model,
                                       const ShapConfig& shap, std::size_t eval_count) {
    if (model.input_width != data.width())
        throw std::invalid_argument("direct audit: model width does not match dataset");
    const std::vector<std::size_t> rows = eval_rows(data, eval_count);
    const Matrix eval_x = data.values.gather_rows(rows);
    const BackgroundSet background = make_background(data, shap.background_size);
    InfluenceValues values = shap_batch(model, eval_x, background, shap);
    for (const Column& c : data.columns) values.feature_names.push_back(c.name);
    return values;
}

SensitivityRecord sensitivity_decomposition(const DisentangledRep& rep, const BatchModel& model,
                                            std::span<const double> instance) {
    if (instance.size() != rep.input_width())
        throw std::invalid_argument("sensitivity: instance width mismatch");
    constexpr double h = 1e-4;

    const Matrix enc = encode(rep, Matrix::row_vector({instance.begin(), instance.end()}));
    const double p = enc(0, 0);
    Matrix latents(1, rep.latent_dim());
    for (std::size_t k = 0; k < rep.latent_dim(); ++k) latents(0, k) = enc(0, k + 1);

    // sqrt inversion restricts squared handcrafted features to p >= 0
    const bool nonnegative = rep.kind == RepKind::HandcraftedXY && rep.feature_index % 3 == 2;

    SensitivityRecord record;
    auto total = [&](double pv) {
        const Matrix xhat = decode(rep, {pv}, latents);
        return model.eval(xhat)(0, 0);
    };
    record.dy_dp_total = central_difference(total, p, h, record.one_sided, nonnegative);

    const Matrix xhat = decode(rep, {p}, latents);
    auto direct = [&](double pv) {
        Matrix probe = xhat;
        probe(0, rep.feature_index) = pv;
        return model.eval(probe)(0, 0);
    };
    bool unused = false;
    record.dm_dp_direct = central_difference(direct, xhat(0, rep.feature_index), h, unused, false);
    return record;
}

namespace {

FeatureSummary column_summary(const Matrix& phi, std::size_t col) {
    FeatureSummary s;
    double abs_sum = 0.0, signed_sum = 0.0, max_abs = 0.0;
    for (std::size_t i = 0; i < phi.rows; ++i) {
        const double v = phi(i, col);
        abs_sum += std::fabs(v);
        signed_sum += v;
        max_abs = std::max(max_abs, std::fabs(v));
    }
    const double n = static_cast<double>(phi.rows);
    s.mean_abs_phi = abs_sum / n;
    s.max_abs_phi = max_abs;
    s.mean_phi = signed_sum / n;
    return s;
}

}  // namespace

std::vector<FeatureSummary> aggregate_influence(const AuditReport& report) {
    if (report.features.empty()) throw std::invalid_argument("aggregate_influence: empty report");
    std::vector<FeatureSummary> out;
    for (const FeatureAudit& fa : report.features) {
        FeatureSummary s;
        if (fa.failed) {
            s.feature = fa.feature;
            s.failed = true;
        } else {
            s = column_summary(fa.influence.phi, 0);  // column 0 is p
            s.feature = fa.feature;
            s.disentanglement = fa.errors.disentanglement;
            s.constant_feature = fa.errors.constant_feature;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<FeatureSummary> aggregate_columns(const InfluenceValues& values) {
    std::vector<FeatureSummary> out;
    for (std::size_t j = 0; j < values.phi.cols; ++j) {
        FeatureSummary s = column_summary(values.phi, j);
        s.feature = j < values.feature_names.size() ? values.feature_names[j] : "col_" + std::to_string(j);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace dia
