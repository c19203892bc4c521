#include "dia/report_io.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <sstream>

#include "dia/csv.hpp"
#include "dia/figures.hpp"

namespace dia {

std::string safe_file_token(const std::string& name) {
    std::string out;
    for (char c : name)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_');
    return out;
}

void write_error_csv(const std::filesystem::path& path, const ErrorReport& errors,
                     const std::vector<std::string>& column_names) {
    std::vector<std::string> header = {"instance"};
    for (std::size_t j = 0; j < errors.reconstruction.cols; ++j)
        header.push_back("recon:" + (j < column_names.size() ? column_names[j] : "col_" + std::to_string(j)));
    header.push_back("prediction");

    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < errors.reconstruction.rows; ++i) {
        std::vector<std::string> row = {std::to_string(i)};
        for (std::size_t j = 0; j < errors.reconstruction.cols; ++j)
            row.push_back(format_double(errors.reconstruction(i, j)));
        row.push_back(format_double(errors.prediction[i]));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

namespace {

std::string disentanglement_cell(const FeatureSummary& s) {
    if (s.failed) return "";
    if (s.constant_feature) return "constant_feature";
    return s.disentanglement ? format_double(*s.disentanglement) : "";
}

std::string fixed(double v) {
    std::ostringstream ss;
    ss << std::setprecision(6) << std::fixed << v;
    return ss.str();
}

}  // namespace

std::string summary_table_text(const AuditReport& report) {
    const std::vector<FeatureSummary> summaries = aggregate_influence(report);
    std::size_t name_w = 7;
    for (const FeatureSummary& s : summaries) name_w = std::max(name_w, s.feature.size());

    std::ostringstream ss;
    ss << std::left << std::setw(static_cast<int>(name_w) + 2) << "feature" << std::right
       << std::setw(14) << "mean|phi|" << std::setw(14) << "max|phi|" << std::setw(14) << "mean phi"
       << std::setw(18) << "disentanglement" << std::setw(10) << "status" << "\n";
    for (const FeatureSummary& s : summaries) {
        ss << std::left << std::setw(static_cast<int>(name_w) + 2) << s.feature << std::right;
        if (s.failed) {
            ss << std::setw(14) << "-" << std::setw(14) << "-" << std::setw(14) << "-" << std::setw(18) << "-"
               << std::setw(10) << "failed";
        } else {
            ss << std::setw(14) << fixed(s.mean_abs_phi) << std::setw(14) << fixed(s.max_abs_phi)
               << std::setw(14) << fixed(s.mean_phi) << std::setw(18)
               << (s.constant_feature ? "constant_feature"
                                      : (s.disentanglement ? fixed(*s.disentanglement) : "-"))
               << std::setw(10) << "ok";
        }
        ss << "\n";
    }
    return ss.str();
}

void write_audit_report(const std::filesystem::path& dir, const AuditReport& report,
                        const ordered_json& manifest, const ReportWriteOptions& options) {
    std::filesystem::create_directories(dir);

    for (const FeatureAudit& fa : report.features) {
        if (fa.failed) continue;
        const std::string token = safe_file_token(fa.feature);
        save_influence_csv(dir / ("influence_" + token + ".csv"), fa.influence);
        write_error_csv(dir / ("errors_" + token + ".csv"), fa.errors,
                        fa.rep ? fa.rep->column_names : std::vector<std::string>{});
        if (options.save_reps && fa.rep) save_rep(dir / ("dr_" + token + ".json"), *fa.rep);
        if (options.figures && fa.eval_p.size() == fa.influence.phi.rows) {
            std::vector<double> ys;
            ys.reserve(fa.influence.phi.rows);
            for (std::size_t i = 0; i < fa.influence.phi.rows; ++i) ys.push_back(fa.influence.phi(i, 0));
            write_text_file(dir / ("influence_" + token + ".svg"),
                            svg_scatter("indirect influence of " + fa.feature, fa.feature, "phi",
                                        fa.eval_p, ys));
        }
    }

    if (report.direct) {
        save_influence_csv(dir / "direct_influence.csv", *report.direct);
        std::vector<std::string> header = {"feature", "mean_abs_phi", "max_abs_phi", "mean_phi"};
        std::vector<std::vector<std::string>> rows;
        for (const FeatureSummary& s : aggregate_columns(*report.direct))
            rows.push_back({s.feature, format_double(s.mean_abs_phi), format_double(s.max_abs_phi),
                            format_double(s.mean_phi)});
        write_csv(dir / "direct_summary.csv", header, rows);
    }

    const std::vector<FeatureSummary> summaries = aggregate_influence(report);
    {
        std::vector<std::string> header = {"feature",  "mean_abs_phi",          "max_abs_phi",
                                           "mean_phi", "disentanglement_error", "status"};
        std::vector<std::vector<std::string>> rows;
        for (const FeatureSummary& s : summaries) {
            if (s.failed) {
                rows.push_back({s.feature, "", "", "", "", "failed"});
            } else {
                rows.push_back({s.feature, format_double(s.mean_abs_phi), format_double(s.max_abs_phi),
                                format_double(s.mean_phi), disentanglement_cell(s), "ok"});
            }
        }
        write_csv(dir / "summary.csv", header, rows);
    }
    write_text_file(dir / "summary.txt", summary_table_text(report));

    if (options.figures) {
        std::vector<std::string> labels;
        std::vector<double> heights;
        for (const FeatureSummary& s : summaries) {
            if (s.failed) continue;
            labels.push_back(s.feature);
            heights.push_back(s.mean_abs_phi);
        }
        write_text_file(dir / "mean_abs_influence.svg",
                        svg_bars("mean |phi| per audited feature", labels, heights));
    }

    save_json(dir / "manifest.json", manifest);
}

}  // namespace dia
