#pragma once

#include <filesystem>
#include <string>

#include "dia/audit.hpp"
#include "dia/serialize.hpp"

namespace dia {

std::string safe_file_token(const std::string& name);

struct ReportWriteOptions {
    bool figures = false;
    bool save_reps = false;
};

// Report directory layout:
//   influence_<feature>.csv   per-instance phi over (p, latents)
//   errors_<feature>.csv      per-instance reconstruction and prediction errors
//   direct_influence.csv      raw-feature audit, when present
//   summary.csv / summary.txt aggregates per audited feature
//   manifest.json             caller-provided manifest, written verbatim
void write_audit_report(const std::filesystem::path& dir, const AuditReport& report,
                        const ordered_json& manifest, const ReportWriteOptions& options = {});

std::string summary_table_text(const AuditReport& report);

void write_error_csv(const std::filesystem::path& path, const ErrorReport& errors,
                     const std::vector<std::string>& column_names);

}  // namespace dia
