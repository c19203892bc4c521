#include "run_config.hpp"

#include <nlohmann/json.hpp>

namespace dia::cli {

ordered_json config_to_json(const RunConfig& c) {
    return ordered_json{{"dataset", c.dataset},
                        {"n", c.n},
                        {"data_seed", c.data_seed},
                        {"train_file", c.train_file},
                        {"test_file", c.test_file},
                        {"rare_threshold", c.rare_threshold},
                        {"dataset_dir", c.dataset_dir},
                        {"model", c.model},
                        {"model_hidden", c.model_hidden},
                        {"train_lr", c.train_lr},
                        {"train_steps", c.train_steps},
                        {"train_batch", c.train_batch},
                        {"train_seed", c.train_seed},
                        {"train_loss", c.train_loss},
                        {"beta", c.beta},
                        {"latent_dim", c.latent_dim},
                        {"dr_lr", c.dr_lr},
                        {"dr_batch", c.dr_batch},
                        {"dr_steps", c.dr_steps},
                        {"p_is_binary", c.p_is_binary},
                        {"dr_hidden", c.dr_hidden},
                        {"shap_mode", c.shap_mode},
                        {"background", c.background},
                        {"samples", c.samples},
                        {"exact_width_limit", c.exact_width_limit},
                        {"features", c.features},
                        {"mode", c.mode},
                        {"dr_source", c.dr_source},
                        {"rep_dir", c.rep_dir},
                        {"rep_file", c.rep_file},
                        {"eval_count", c.eval_count},
                        {"master_seed", c.master_seed},
                        {"jobs", c.jobs},
                        {"figures", c.figures},
                        {"save_reps", c.save_reps},
                        {"out", c.out}};
}

RunConfig config_from_json(const ordered_json& j, RunConfig c) {
    auto get = [&j](const char* key, auto& slot) {
        if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("dataset", c.dataset);
    get("n", c.n);
    get("data_seed", c.data_seed);
    get("train_file", c.train_file);
    get("test_file", c.test_file);
    get("rare_threshold", c.rare_threshold);
    get("dataset_dir", c.dataset_dir);
    get("model", c.model);
    get("model_hidden", c.model_hidden);
    get("train_lr", c.train_lr);
    get("train_steps", c.train_steps);
    get("train_batch", c.train_batch);
    get("train_seed", c.train_seed);
    get("train_loss", c.train_loss);
    get("beta", c.beta);
    get("latent_dim", c.latent_dim);
    get("dr_lr", c.dr_lr);
    get("dr_batch", c.dr_batch);
    get("dr_steps", c.dr_steps);
    get("p_is_binary", c.p_is_binary);
    get("dr_hidden", c.dr_hidden);
    get("shap_mode", c.shap_mode);
    get("background", c.background);
    get("samples", c.samples);
    get("exact_width_limit", c.exact_width_limit);
    get("features", c.features);
    get("mode", c.mode);
    get("dr_source", c.dr_source);
    get("rep_dir", c.rep_dir);
    get("rep_file", c.rep_file);
    get("eval_count", c.eval_count);
    get("master_seed", c.master_seed);
    get("jobs", c.jobs);
    get("figures", c.figures);
    get("save_reps", c.save_reps);
    get("out", c.out);
    return c;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    ordered_json j = load_json(path);
    if (j.contains("config")) j = j.at("config");
    return config_from_json(j, std::move(base));
}

}  // namespace dia::cli
