#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dia/serialize.hpp"

namespace dia::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// One flat configuration shared by every subcommand; a manifest dumps the
// effective values so any run can be replayed from its manifest alone.
struct RunConfig {
    // dataset generation / ingestion
    std::string dataset = "xy";  // xy | proxy | adult
    std::size_t n = 5000;
    std::uint64_t data_seed = 0;
    std::string train_file;
    std::string test_file;
    std::size_t rare_threshold = 1000;

    // prepared-dataset consumers
    std::string dataset_dir;

    // audited model
    std::string model = "fixed-xy";  // fixed-xy | fixed-proxy | path to a net bundle
    std::vector<std::size_t> model_hidden;
    double train_lr = 0.01;
    std::size_t train_steps = 10000;
    std::size_t train_batch = 16;
    std::uint64_t train_seed = 0;
    std::string train_loss = "auto";  // auto | mse | bce

    // disentangled representation
    double beta = 0.5;
    std::size_t latent_dim = 4;
    double dr_lr = 0.01;
    std::size_t dr_batch = 16;
    std::size_t dr_steps = 10000;
    bool p_is_binary = false;
    std::vector<std::size_t> dr_hidden = {10, 10};

    // influence estimator
    std::string shap_mode = "exact";  // exact | permutation
    std::size_t background = 50;
    std::size_t samples = 200;
    std::size_t exact_width_limit = 12;

    // audit plan
    std::vector<std::string> features = {"all"};
    std::string mode = "indirect";       // direct | indirect | both
    std::string dr_source = "handcrafted";  // handcrafted | learned | preloaded
    std::string rep_dir;
    std::string rep_file;
    std::size_t eval_count = 100;
    std::uint64_t master_seed = 0;
    std::size_t jobs = 1;
    bool figures = false;
    bool save_reps = false;

    std::string out = "runs/out";
};

ordered_json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const ordered_json& j, RunConfig base = {});

// Accepts either a bare config object or a manifest with a "config" block.
RunConfig load_config_file(const std::string& path, RunConfig base = {});

}  // namespace dia::cli
