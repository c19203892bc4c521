#pragma once

#include "run_config.hpp"

namespace dia::cli {

int cmd_gen_data(const RunConfig& cfg);
int cmd_train_model(const RunConfig& cfg);
int cmd_train_dr(const RunConfig& cfg);
int cmd_audit(const RunConfig& cfg);
int cmd_errors(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);
int cmd_fetch_adult(const RunConfig& cfg);

}  // namespace dia::cli
