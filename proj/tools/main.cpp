#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"
#include "run_config.hpp"

using namespace dia::cli;

namespace {

void add_dr_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--beta", cfg.beta, "adversarial weight in the encoder loss");
    sub->add_option("--latent", cfg.latent_dim, "latent width");
    sub->add_option("--dr-lr", cfg.dr_lr, "representation learning rate");
    sub->add_option("--dr-batch", cfg.dr_batch, "representation minibatch size");
    sub->add_option("--dr-steps", cfg.dr_steps, "representation train steps");
    sub->add_option("--dr-hidden", cfg.dr_hidden, "hidden layer widths")->delimiter(',');
    sub->add_flag("--binary-p", cfg.p_is_binary, "treat the audited feature as binary (bce)");
}

void add_shap_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--shap-mode", cfg.shap_mode, "exact | permutation");
    sub->add_option("--background", cfg.background, "background rows");
    sub->add_option("--samples", cfg.samples, "permutations per instance");
    sub->add_option("--exact-width-limit", cfg.exact_width_limit, "max width for exact enumeration");
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;

    // config file first, flags override
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                cfg = load_config_file(argv[i + 1], cfg);
            } catch (const std::exception& e) {
                std::cerr << "error: cannot load config: " << e.what() << "\n";
                return 1;
            }
        }
    }

    CLI::App app{"dia - disentangled influence audits for tabular models"};
    app.require_subcommand(1);
    std::string config_path;

    auto* gen = app.add_subcommand("gen-data", "generate or preprocess a dataset");
    gen->add_option("--config", config_path, "JSON config or previous manifest");
    gen->add_option("--dataset", cfg.dataset, "xy | proxy | adult");
    gen->add_option("--n", cfg.n, "synthetic rows");
    gen->add_option("--seed", cfg.data_seed, "generator seed");
    gen->add_option("--train-file", cfg.train_file, "raw adult training file");
    gen->add_option("--test-file", cfg.test_file, "raw adult test file");
    gen->add_option("--rare-threshold", cfg.rare_threshold, "categorical rare-value threshold");
    gen->add_option("--out", cfg.out, "output directory");

    auto* train = app.add_subcommand("train-model", "train an audited classifier/regressor");
    train->add_option("--config", config_path, "JSON config or previous manifest");
    train->add_option("--dataset-dir", cfg.dataset_dir, "prepared dataset directory")->required(false);
    train->add_option("--hidden", cfg.model_hidden, "hidden layer widths")->delimiter(',');
    train->add_option("--lr", cfg.train_lr, "learning rate");
    train->add_option("--steps", cfg.train_steps, "train steps");
    train->add_option("--batch", cfg.train_batch, "minibatch size");
    train->add_option("--seed", cfg.train_seed, "train seed");
    train->add_option("--loss", cfg.train_loss, "auto | mse | bce");
    train->add_option("--out", cfg.out, "output directory");

    auto* dr = app.add_subcommand("train-dr", "train a disentangled representation");
    dr->add_option("--config", config_path, "JSON config or previous manifest");
    dr->add_option("--dataset-dir", cfg.dataset_dir, "prepared dataset directory");
    dr->add_option("--feature", cfg.features, "feature of interest")->delimiter(',');
    dr->add_option("--seed", cfg.master_seed, "master seed");
    dr->add_option("--out", cfg.out, "output directory");
    add_dr_options(dr, cfg);

    auto* audit = app.add_subcommand("audit", "run direct/indirect influence audits");
    audit->add_option("--config", config_path, "JSON config or previous manifest");
    audit->add_option("--dataset-dir", cfg.dataset_dir, "prepared dataset directory");
    audit->add_option("--model", cfg.model, "fixed-xy | fixed-proxy | model bundle path");
    audit->add_option("--mode", cfg.mode, "direct | indirect | both");
    audit->add_option("--dr", cfg.dr_source, "handcrafted | learned | preloaded");
    audit->add_option("--features", cfg.features, "comma list or 'all'")->delimiter(',');
    audit->add_option("--rep-dir", cfg.rep_dir, "directory of dr_<feature>.json bundles");
    audit->add_option("--eval-count", cfg.eval_count, "test rows audited (0 = all)");
    audit->add_option("--seed", cfg.master_seed, "master seed");
    audit->add_option("--jobs", cfg.jobs, "parallel per-feature workers");
    audit->add_flag("--figures", cfg.figures, "emit SVG figures");
    audit->add_flag("--save-reps", cfg.save_reps, "save trained representations");
    audit->add_option("--out", cfg.out, "output directory");
    add_dr_options(audit, cfg);
    add_shap_options(audit, cfg);

    auto* errors = app.add_subcommand("errors", "error diagnostics for a saved representation");
    errors->add_option("--config", config_path, "JSON config or previous manifest");
    errors->add_option("--rep", cfg.rep_file, "representation bundle");
    errors->add_option("--dataset-dir", cfg.dataset_dir, "prepared dataset directory");
    errors->add_option("--model", cfg.model, "audited model");
    errors->add_option("--out", cfg.out, "output directory");

    auto* report = app.add_subcommand("report", "combined summary for an audit run");
    report->add_option("--config", config_path, "JSON config or previous manifest");
    report->add_option("--run", cfg.out, "audit output directory");

    auto* fetch = app.add_subcommand("fetch-adult", "download the UCI census files (curl)");
    fetch->add_option("--config", config_path, "JSON config or previous manifest");
    fetch->add_option("--out", cfg.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(cfg);
        if (train->parsed()) return cmd_train_model(cfg);
        if (dr->parsed()) return cmd_train_dr(cfg);
        if (audit->parsed()) return cmd_audit(cfg);
        if (errors->parsed()) return cmd_errors(cfg);
        if (report->parsed()) return cmd_report(cfg);
        if (fetch->parsed()) return cmd_fetch_adult(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
