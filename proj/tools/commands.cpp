#include "commands.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <nlohmann/json.hpp>

#include "dia/adult.hpp"
#include "dia/audit.hpp"
#include "dia/csv.hpp"
#include "dia/figures.hpp"
#include "dia/report_io.hpp"
#include "dia/rng.hpp"

namespace dia::cli {

namespace fs = std::filesystem;

namespace {

ordered_json make_manifest(const std::string& command, const RunConfig& cfg,
                           const std::map<std::string, std::string>& inputs, ordered_json results) {
    ordered_json in = ordered_json::object();
    for (const auto& [path, digest] : inputs) in[path] = digest;
    return ordered_json{{"tool", "dia"},        {"version", kToolVersion}, {"command", command},
                        {"config", config_to_json(cfg)}, {"inputs", in},  {"results", std::move(results)}};
}

std::map<std::string, std::string> dataset_digests(const fs::path& dir) {
    std::map<std::string, std::string> digests;
    for (const char* name : {"schema.json", "train.csv", "test.csv"})
        digests[(dir / name).string()] = file_digest(dir / name);
    return digests;
}

TabularDataset require_dataset(const RunConfig& cfg) {
    if (cfg.dataset_dir.empty()) throw std::invalid_argument("--dataset-dir is required");
    if (!fs::exists(fs::path(cfg.dataset_dir) / "schema.json"))
        throw std::invalid_argument("no dataset at '" + cfg.dataset_dir + "'");
    return load_dataset(cfg.dataset_dir);
}

DenseNet resolve_net(const RunConfig& cfg) {
    if (cfg.model == "fixed-xy") return xy_fixed_model();
    if (cfg.model == "fixed-proxy") return proxy_fixture_model();
    if (!fs::exists(cfg.model)) throw std::invalid_argument("no model bundle at '" + cfg.model + "'");
    return load_net(cfg.model);
}

std::vector<std::string> resolve_features(const RunConfig& cfg, const TabularDataset& ds) {
    if (cfg.features.size() == 1 && cfg.features[0] == "all") {
        std::vector<std::string> all;
        for (const Column& c : ds.columns) all.push_back(c.name);
        return all;
    }
    return cfg.features;
}

DisentangleConfig dr_config(const RunConfig& cfg) {
    DisentangleConfig dr;
    dr.beta = cfg.beta;
    dr.latent_dim = cfg.latent_dim;
    dr.learning_rate = cfg.dr_lr;
    dr.batch_size = cfg.dr_batch;
    dr.train_steps = cfg.dr_steps;
    dr.p_is_binary = cfg.p_is_binary;
    dr.hidden = cfg.dr_hidden;
    dr.seed = cfg.master_seed;
    return dr;
}

ShapConfig shap_config(const RunConfig& cfg) {
    ShapConfig shap;
    if (cfg.shap_mode == "exact") {
        shap.mode = ShapMode::Exact;
    } else if (cfg.shap_mode == "permutation") {
        shap.mode = ShapMode::Permutation;
    } else {
        throw std::invalid_argument("unknown shap mode '" + cfg.shap_mode + "'");
    }
    shap.background_size = cfg.background;
    shap.permutation_samples = cfg.samples;
    shap.exact_width_limit = cfg.exact_width_limit;
    shap.seed = cfg.master_seed;
    return shap;
}

}  // namespace

int cmd_gen_data(const RunConfig& cfg) {
    const fs::path out = cfg.out;
    fs::create_directories(out);
    std::map<std::string, std::string> inputs;
    ordered_json results;

    if (cfg.dataset == "xy" || cfg.dataset == "proxy") {
        TabularDataset ds = cfg.dataset == "xy" ? gen_xy_synthetic(cfg.n, cfg.data_seed)
                                                : gen_proxy_fixture(cfg.n, cfg.data_seed);
        save_dataset(out, ds);
        results = {{"rows", ds.rows()},
                   {"columns", ds.width()},
                   {"train_rows", ds.rows_of(Split::Train).size()},
                   {"test_rows", ds.rows_of(Split::Test).size()}};
    } else if (cfg.dataset == "adult") {
        if (cfg.train_file.empty() || cfg.test_file.empty())
            throw std::invalid_argument("adult needs --train-file and --test-file");
        RawTable train = load_adult_raw(cfg.train_file);
        RawTable test = load_adult_raw(cfg.test_file);
        inputs[cfg.train_file] = file_digest(cfg.train_file);
        inputs[cfg.test_file] = file_digest(cfg.test_file);

        PreprocessOptions options;
        options.rare_threshold = cfg.rare_threshold;
        auto [ds, report] = preprocess_adult(train, test, options);
        save_dataset(out, ds);
        save_json(out / "preprocess_report.json", preprocess_report_to_json(report));
        results = {{"rows", ds.rows()},
                   {"columns", ds.width()},
                   {"raw_train_rows", train.rows.size()},
                   {"raw_test_rows", test.rows.size()},
                   {"missing_cells", train.missing_cells + test.missing_cells}};
    } else {
        throw std::invalid_argument("unknown dataset '" + cfg.dataset + "'");
    }

    save_json(out / "manifest.json", make_manifest("gen-data", cfg, inputs, std::move(results)));
    std::cout << "dataset written to " << out.string() << "\n";
    return 0;
}

int cmd_train_model(const RunConfig& cfg) {
    TabularDataset ds = require_dataset(cfg);
    const fs::path out = cfg.out;
    fs::create_directories(out);

    const bool binary = cfg.train_loss == "bce" ||
                        (cfg.train_loss == "auto" && ds.task == Task::BinaryClassification);
    TrainConfig tc;
    tc.learning_rate = cfg.train_lr;
    tc.batch_size = cfg.train_batch;
    tc.train_steps = cfg.train_steps;
    tc.seed = cfg.train_seed;
    tc.loss = binary ? LossKind::Bce : LossKind::Mse;

    std::vector<std::size_t> dims = {ds.width()};
    dims.insert(dims.end(), cfg.model_hidden.begin(), cfg.model_hidden.end());
    dims.push_back(1);
    std::vector<Activation> acts(dims.size() - 1, Activation::Relu);
    acts.back() = binary ? Activation::Sigmoid : Activation::Linear;

    DenseNet net = make_net(dims, acts, tc.seed);
    TrainResult result = sgd_train(net, ds.matrix_of(Split::Train),
                                   Matrix::column_vector(ds.labels_of(Split::Train)), tc);

    const Matrix test_x = ds.matrix_of(Split::Test);
    const Matrix test_y = Matrix::column_vector(ds.labels_of(Split::Test));
    const Matrix pred = forward(result.net, test_x);
    const double test_loss = loss_value(tc.loss, pred, test_y);
    double accuracy = 0.0;
    if (binary) {
        for (std::size_t i = 0; i < pred.rows; ++i)
            if ((pred(i, 0) >= 0.5) == (test_y(i, 0) >= 0.5)) accuracy += 1.0;
        accuracy /= static_cast<double>(pred.rows);
    }

    save_net(out / "model.json", result.net);
    ordered_json metrics{{"loss_kind", binary ? "bce" : "mse"}, {"test_loss", test_loss}};
    if (binary) metrics["test_accuracy"] = accuracy;
    metrics["final_train_loss"] = result.loss_trace.empty() ? 0.0 : result.loss_trace.back();
    save_json(out / "metrics.json", metrics);
    save_json(out / "manifest.json",
              make_manifest("train-model", cfg, dataset_digests(cfg.dataset_dir), metrics));
    std::cout << "model written to " << (out / "model.json").string() << "; test loss " << test_loss;
    if (binary) std::cout << ", accuracy " << accuracy;
    std::cout << "\n";
    return 0;
}

int cmd_train_dr(const RunConfig& cfg) {
    TabularDataset ds = require_dataset(cfg);
    if (cfg.features.empty() || cfg.features[0] == "all")
        throw std::invalid_argument("train-dr needs one --feature");
    const std::string feature = cfg.features.front();
    const fs::path out = cfg.out;
    fs::create_directories(out);

    DisentangleConfig dr = dr_config(cfg);
    dr.seed = derive_seed(cfg.master_seed, "dr:" + feature);
    AdversarialTrace trace;
    DisentangledRep rep = train_adversarial(ds, feature, dr, &trace);

    const std::string token = safe_file_token(feature);
    save_rep(out / ("dr_" + token + ".json"), rep);
    {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t s = 0; s < trace.dec.size(); ++s)
            rows.push_back({std::to_string(s), format_double(trace.disc[s]), format_double(trace.dec[s]),
                            format_double(trace.enc[s])});
        write_csv(out / ("dr_" + token + "_losses.csv"), {"step", "disc", "dec", "enc"}, rows);
    }
    ordered_json results{{"feature", feature},
                         {"final_dec_loss", trace.dec.empty() ? 0.0 : trace.dec.back()},
                         {"final_disc_loss", trace.disc.empty() ? 0.0 : trace.disc.back()},
                         {"notes", rep.notes}};
    save_json(out / "manifest.json",
              make_manifest("train-dr", cfg, dataset_digests(cfg.dataset_dir), results));
    std::cout << "representation written to " << (out / ("dr_" + token + ".json")).string() << "\n";
    return 0;
}

int cmd_audit(const RunConfig& cfg) {
    TabularDataset ds = require_dataset(cfg);
    DenseNet net = resolve_net(cfg);
    BatchModel model = net_model(net);
    const fs::path out = cfg.out;

    std::map<std::string, std::string> inputs = dataset_digests(cfg.dataset_dir);
    if (cfg.model != "fixed-xy" && cfg.model != "fixed-proxy") inputs[cfg.model] = file_digest(cfg.model);

    AuditPlan plan;
    plan.features = resolve_features(cfg, ds);
    plan.shap = shap_config(cfg);
    plan.dr = dr_config(cfg);
    plan.master_seed = cfg.master_seed;
    plan.eval_count = cfg.eval_count;
    plan.jobs = cfg.jobs;
    plan.include_direct = cfg.mode != "indirect";
    if (cfg.dr_source == "handcrafted") {
        plan.dr_source = DrSource::HandcraftedXY;
    } else if (cfg.dr_source == "learned") {
        plan.dr_source = DrSource::Learned;
    } else if (cfg.dr_source == "preloaded") {
        plan.dr_source = DrSource::Preloaded;
        if (cfg.rep_dir.empty()) throw std::invalid_argument("preloaded source needs --rep-dir");
        for (const std::string& f : plan.features) {
            const fs::path rep_path = fs::path(cfg.rep_dir) / ("dr_" + safe_file_token(f) + ".json");
            plan.preloaded.emplace(f, load_rep(rep_path));
            inputs[rep_path.string()] = file_digest(rep_path);
        }
    } else {
        throw std::invalid_argument("unknown dr source '" + cfg.dr_source + "'");
    }

    if (cfg.mode == "direct") {
        ShapConfig shap = plan.shap;
        shap.seed = derive_seed(plan.master_seed, "shap:direct");
        InfluenceValues direct = direct_influence_audit(ds, model, shap, plan.eval_count);
        fs::create_directories(out);
        save_influence_csv(out / "direct_influence.csv", direct);
        std::vector<std::vector<std::string>> rows;
        for (const FeatureSummary& s : aggregate_columns(direct))
            rows.push_back({s.feature, format_double(s.mean_abs_phi), format_double(s.max_abs_phi),
                            format_double(s.mean_phi)});
        write_csv(out / "direct_summary.csv", {"feature", "mean_abs_phi", "max_abs_phi", "mean_phi"}, rows);
        ordered_json results{{"instances", direct.phi.rows}, {"features", direct.phi.cols}};
        save_json(out / "manifest.json", make_manifest("audit", cfg, inputs, std::move(results)));
        std::cout << "direct audit written to " << out.string() << "\n";
        return 0;
    }

    if (cfg.mode != "indirect" && cfg.mode != "both")
        throw std::invalid_argument("unknown mode '" + cfg.mode + "'");

    AuditReport report = disentangled_influence_audit(ds, model, plan);

    ordered_json statuses = ordered_json::object();
    std::size_t succeeded = 0;
    for (const FeatureAudit& fa : report.features) {
        statuses[fa.feature] = fa.failed ? "failed: " + fa.failure_reason : "ok";
        if (!fa.failed) ++succeeded;
    }
    ordered_json results{{"eval_instances", report.eval_count},
                         {"background_rows", report.background_count},
                         {"succeeded", succeeded},
                         {"failed", report.features.size() - succeeded},
                         {"feature_status", statuses}};

    ReportWriteOptions options;
    options.figures = cfg.figures;
    options.save_reps = cfg.save_reps;
    write_audit_report(out, report, make_manifest("audit", cfg, inputs, std::move(results)), options);
    std::cout << summary_table_text(report);
    std::cout << "audit report written to " << out.string() << "\n";

    return succeeded > 0 ? 0 : 2;
}

int cmd_errors(const RunConfig& cfg) {
    if (cfg.rep_file.empty()) throw std::invalid_argument("--rep is required");
    TabularDataset ds = require_dataset(cfg);
    DisentangledRep rep = load_rep(cfg.rep_file);
    BatchModel model = net_model(resolve_net(cfg));
    const fs::path out = cfg.out;
    fs::create_directories(out);

    ErrorReport report = error_report(rep, model, ds);
    const std::string token = safe_file_token(rep.feature);
    write_error_csv(out / ("errors_" + token + ".csv"), report, rep.column_names);

    std::map<std::string, std::string> inputs = dataset_digests(cfg.dataset_dir);
    inputs[cfg.rep_file] = file_digest(cfg.rep_file);
    ordered_json results{{"feature", rep.feature},
                         {"instances", report.reconstruction.rows},
                         {"disentanglement_error",
                          report.constant_feature
                              ? ordered_json("constant_feature")
                              : (report.disentanglement ? ordered_json(*report.disentanglement)
                                                        : ordered_json(nullptr))}};
    save_json(out / "manifest.json", make_manifest("errors", cfg, inputs, std::move(results)));
    std::cout << "error report written to " << out.string() << "\n";
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    const fs::path run = cfg.out;  // --run binds here
    if (!fs::exists(run / "summary.csv"))
        throw std::invalid_argument("no summary.csv under '" + run.string() + "'");

    // cross-check the summary against aggregates recomputed from the
    // per-instance files
    std::ifstream in(run / "summary.csv");
    std::string line;
    std::getline(in, line);  // header
    std::map<std::string, double> summary_mean_abs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() >= 2 && cells.back() == "ok")
            summary_mean_abs[safe_file_token(cells[0])] = parse_double(cells[1], "summary mean_abs_phi");
    }

    std::size_t checked = 0;
    for (const auto& [token, expected] : summary_mean_abs) {
        const fs::path path = run / ("influence_" + token + ".csv");
        if (!fs::exists(path)) throw std::runtime_error("missing per-instance file " + path.string());
        InfluenceValues v = load_influence_csv(path);
        double mean_abs = 0.0;
        for (std::size_t i = 0; i < v.phi.rows; ++i) mean_abs += std::fabs(v.phi(i, 0));
        mean_abs /= static_cast<double>(v.phi.rows);
        if (mean_abs != expected)
            throw std::runtime_error("summary/per-instance mismatch for " + token + ": " +
                                     format_double(mean_abs) + " vs " + format_double(expected));
        ++checked;
    }

    const std::string text = read_text_file(run / "summary.txt");
    std::cout << text;
    if (fs::exists(run / "direct_summary.csv")) std::cout << "direct audit: see direct_summary.csv\n";
    std::cout << "(" << checked << " per-feature influence files verified against the summary)\n";
    write_text_file(run / "report.txt", text);
    return 0;
}

int cmd_fetch_adult(const RunConfig& cfg) {
    const fs::path out = cfg.out;
    fs::create_directories(out);
    const std::string base = "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/";
    for (const char* name : {"adult.data", "adult.test"}) {
        const std::string cmd = "curl -fsSL " + base + name + " -o " + (out / name).string();
        std::cout << cmd << "\n";
        if (std::system(cmd.c_str()) != 0) {
            std::cerr << "download failed; fetch the files manually and pass --train-file/--test-file\n";
            return 2;
        }
    }
    std::cout << "adult files written to " << out.string() << "\n";
    return 0;
}

}  // namespace dia::cli
