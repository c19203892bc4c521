#include "dia/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "dia/csv.hpp"

namespace dia {

namespace {

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
    }
    return "linear";
}

Activation activation_from(const std::string& s) {
    if (s == "linear") return Activation::Linear;
    if (s == "relu") return Activation::Relu;
    if (s == "sigmoid") return Activation::Sigmoid;
    throw std::runtime_error("unknown activation '" + s + "'");
}

std::string kind_name(ColumnKind k) { return k == ColumnKind::Numeric ? "numeric" : "one_hot_member"; }

ColumnKind kind_from(const std::string& s) {
    if (s == "numeric") return ColumnKind::Numeric;
    if (s == "one_hot_member") return ColumnKind::OneHotMember;
    throw std::runtime_error("unknown column kind '" + s + "'");
}

}  // namespace

ordered_json net_to_json(const DenseNet& net) {
    ordered_json layers = ordered_json::array();
    for (const Layer& l : net.layers) {
        layers.push_back({{"in", l.in_dim()},
                          {"out", l.out_dim()},
                          {"activation", activation_name(l.activation)},
                          {"trainable", l.trainable},
                          {"weights", l.weights.data},
                          {"bias", l.bias}});
    }
    return ordered_json{{"type", "dense_net"}, {"layers", layers}};
}

DenseNet net_from_json(const ordered_json& j) {
    if (j.value("type", "") != "dense_net") throw std::runtime_error("not a dense_net bundle");
    DenseNet net;
    for (const auto& lj : j.at("layers")) {
        Layer l;
        l.weights = Matrix(lj.at("in").get<std::size_t>(), lj.at("out").get<std::size_t>());
        l.weights.data = lj.at("weights").get<std::vector<double>>();
        l.bias = lj.at("bias").get<std::vector<double>>();
        l.activation = activation_from(lj.at("activation").get<std::string>());
        l.trainable = lj.value("trainable", true);
        net.layers.push_back(std::move(l));
    }
    net.validate();
    return net;
}

void save_net(const std::filesystem::path& path, const DenseNet& net) { save_json(path, net_to_json(net)); }

DenseNet load_net(const std::filesystem::path& path) { return net_from_json(load_json(path)); }

namespace {

ordered_json config_to_json(const DisentangleConfig& cfg) {
    return ordered_json{{"beta", cfg.beta},
                        {"latent_dim", cfg.latent_dim},
                        {"learning_rate", cfg.learning_rate},
                        {"batch_size", cfg.batch_size},
                        {"train_steps", cfg.train_steps},
                        {"seed", cfg.seed},
                        {"p_is_binary", cfg.p_is_binary},
                        {"hidden", cfg.hidden}};
}

DisentangleConfig config_from_json(const ordered_json& j) {
    DisentangleConfig cfg;
    cfg.beta = j.at("beta").get<double>();
    cfg.latent_dim = j.at("latent_dim").get<std::size_t>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.batch_size = j.at("batch_size").get<std::size_t>();
    cfg.train_steps = j.at("train_steps").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.p_is_binary = j.at("p_is_binary").get<bool>();
    cfg.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    return cfg;
}

}  // namespace

ordered_json rep_to_json(const DisentangledRep& rep) {
    ordered_json j{{"type", "disentangled_rep"},
                   {"kind", rep.kind == RepKind::Learned ? "learned" : "handcrafted_xy"},
                   {"feature", rep.feature},
                   {"feature_index", rep.feature_index},
                   {"column_names", rep.column_names},
                   {"config", config_to_json(rep.config)},
                   {"notes", rep.notes}};
    if (rep.kind == RepKind::Learned) {
        j["encoder"] = net_to_json(rep.encoder);
        j["decoder"] = net_to_json(rep.decoder);
        j["discriminator"] = net_to_json(rep.discriminator);
    }
    return j;
}

DisentangledRep rep_from_json(const ordered_json& j) {
    if (j.value("type", "") != "disentangled_rep") throw std::runtime_error("not a disentangled_rep bundle");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "handcrafted_xy") return handcrafted_xy_rep(j.at("feature").get<std::string>());

    DisentangledRep rep;
    rep.kind = RepKind::Learned;
    rep.feature = j.at("feature").get<std::string>();
    rep.feature_index = j.at("feature_index").get<std::size_t>();
    rep.column_names = j.at("column_names").get<std::vector<std::string>>();
    rep.config = config_from_json(j.at("config"));
    rep.notes = j.at("notes").get<std::vector<std::string>>();
    rep.encoder = net_from_json(j.at("encoder"));
    rep.decoder = net_from_json(j.at("decoder"));
    rep.discriminator = net_from_json(j.at("discriminator"));
    return rep;
}

void save_rep(const std::filesystem::path& path, const DisentangledRep& rep) { save_json(path, rep_to_json(rep)); }

DisentangledRep load_rep(const std::filesystem::path& path) { return rep_from_json(load_json(path)); }

ordered_json preprocess_report_to_json(const PreprocessReport& report) {
    ordered_json numeric = ordered_json::object();
    for (const auto& [name, st] : report.numeric_stats)
        numeric[name] = {{"mean", st.mean}, {"stddev", st.stddev}};
    ordered_json columns = ordered_json::array();
    for (const Column& c : report.result_columns)
        columns.push_back({{"name", c.name}, {"kind", kind_name(c.kind)}, {"group", c.group}});
    return ordered_json{{"type", "preprocess_report"},
                        {"options",
                         {{"rare_threshold", report.options.rare_threshold},
                          {"drop_columns", report.options.drop_columns},
                          {"label_column", report.options.label_column},
                          {"positive_label", report.options.positive_label}}},
                        {"dropped_columns", report.dropped_columns},
                        {"numeric_stats", numeric},
                        {"rare_values", report.rare_values},
                        {"category_order", report.category_order},
                        {"result_columns", columns}};
}

PreprocessReport preprocess_report_from_json(const ordered_json& j) {
    if (j.value("type", "") != "preprocess_report") throw std::runtime_error("not a preprocess_report bundle");
    PreprocessReport report;
    const auto& opt = j.at("options");
    report.options.rare_threshold = opt.at("rare_threshold").get<std::size_t>();
    report.options.drop_columns = opt.at("drop_columns").get<std::vector<std::string>>();
    report.options.label_column = opt.at("label_column").get<std::string>();
    report.options.positive_label = opt.at("positive_label").get<std::string>();
    report.dropped_columns = j.at("dropped_columns").get<std::vector<std::string>>();
    for (const auto& [name, st] : j.at("numeric_stats").items())
        report.numeric_stats[name] = {st.at("mean").get<double>(), st.at("stddev").get<double>()};
    report.rare_values = j.at("rare_values").get<std::map<std::string, std::vector<std::string>>>();
    report.category_order = j.at("category_order").get<std::map<std::string, std::vector<std::string>>>();
    for (const auto& cj : j.at("result_columns"))
        report.result_columns.push_back({cj.at("name").get<std::string>(),
                                         kind_from(cj.at("kind").get<std::string>()),
                                         cj.at("group").get<std::string>()});
    return report;
}

namespace {

void save_split_csv(const std::filesystem::path& path, const TabularDataset& ds, Split s) {
    std::vector<std::string> header;
    for (const Column& c : ds.columns) header.push_back(c.name);
    header.push_back("label");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i : ds.rows_of(s)) {
        std::vector<std::string> row;
        row.reserve(ds.width() + 1);
        for (std::size_t j = 0; j < ds.width(); ++j) row.push_back(format_double(ds.values(i, j)));
        row.push_back(format_double(ds.labels[i]));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

}  // namespace

void save_dataset(const std::filesystem::path& dir, const TabularDataset& ds) {
    std::filesystem::create_directories(dir);
    ordered_json columns = ordered_json::array();
    for (const Column& c : ds.columns)
        columns.push_back({{"name", c.name}, {"kind", kind_name(c.kind)}, {"group", c.group}});
    save_json(dir / "schema.json",
              ordered_json{{"type", "dataset"},
                           {"task", ds.task == Task::Regression ? "regression" : "binary_classification"},
                           {"columns", columns}});
    save_split_csv(dir / "train.csv", ds, Split::Train);
    save_split_csv(dir / "test.csv", ds, Split::Test);
}

TabularDataset load_dataset(const std::filesystem::path& dir) {
    const ordered_json schema = load_json(dir / "schema.json");
    if (schema.value("type", "") != "dataset") throw std::runtime_error("not a dataset directory");

    TabularDataset ds;
    ds.task = schema.at("task").get<std::string>() == "regression" ? Task::Regression
                                                                   : Task::BinaryClassification;
    for (const auto& cj : schema.at("columns"))
        ds.columns.push_back({cj.at("name").get<std::string>(), kind_from(cj.at("kind").get<std::string>()),
                              cj.at("group").get<std::string>()});

    SchemaHints hints;
    for (const Column& c : ds.columns) hints.numeric.push_back(c.name);
    hints.numeric.push_back("label");
    hints.missing_tokens.clear();

    auto append = [&ds](const RawTable& table, Split tag) {
        for (const auto& row : table.rows) {
            for (std::size_t j = 0; j + 1 < row.size(); ++j)
                ds.values.data.push_back(parse_double(row[j], "dataset cell"));
            ds.labels.push_back(parse_double(row.back(), "dataset label"));
            ds.split.push_back(tag);
            ++ds.values.rows;
        }
    };
    ds.values = Matrix(0, ds.columns.size());
    const RawTable train = load_csv(dir / "train.csv", hints);
    if (train.columns.size() != ds.columns.size() + 1)
        throw std::runtime_error("dataset train.csv does not match schema");
    append(train, Split::Train);
    append(load_csv(dir / "test.csv", hints), Split::Test);
    ds.validate();
    return ds;
}

void save_influence_csv(const std::filesystem::path& path, const InfluenceValues& values) {
    std::vector<std::string> header = {"instance"};
    for (std::size_t j = 0; j < values.phi.cols; ++j)
        header.push_back(j < values.feature_names.size() ? "phi:" + values.feature_names[j]
                                                         : "phi:col_" + std::to_string(j));
    const bool with_se = !values.std_errors.data.empty();
    if (with_se)
        for (std::size_t j = 0; j < values.phi.cols; ++j)
            header.push_back("se:" + (j < values.feature_names.size() ? values.feature_names[j]
                                                                      : "col_" + std::to_string(j)));
    header.push_back("base_value");

    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < values.phi.rows; ++i) {
        std::vector<std::string> row = {std::to_string(i)};
        for (std::size_t j = 0; j < values.phi.cols; ++j) row.push_back(format_double(values.phi(i, j)));
        if (with_se)
            for (std::size_t j = 0; j < values.phi.cols; ++j)
                row.push_back(format_double(values.std_errors(i, j)));
        row.push_back(format_double(values.base_value));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

InfluenceValues load_influence_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + path.string() + "' is empty");
    const std::vector<std::string> header = split_csv_line(line);

    InfluenceValues values;
    std::size_t n_phi = 0, n_se = 0;
    for (const std::string& h : header) {
        if (h.rfind("phi:", 0) == 0) {
            values.feature_names.push_back(h.substr(4));
            ++n_phi;
        } else if (h.rfind("se:", 0) == 0) {
            ++n_se;
        }
    }
    std::vector<std::vector<double>> phi_rows, se_rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) throw std::runtime_error("'" + path.string() + "': ragged row");
        std::vector<double> phi_row, se_row;
        for (std::size_t j = 1; j <= n_phi; ++j) phi_row.push_back(parse_double(cells[j], "phi"));
        for (std::size_t j = 0; j < n_se; ++j) se_row.push_back(parse_double(cells[1 + n_phi + j], "se"));
        values.base_value = parse_double(cells.back(), "base_value");
        phi_rows.push_back(std::move(phi_row));
        se_rows.push_back(std::move(se_row));
    }
    values.phi = Matrix::from_rows(phi_rows);
    if (n_se > 0) values.std_errors = Matrix::from_rows(se_rows);
    return values;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void save_json(const std::filesystem::path& path, const ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

ordered_json load_json(const std::filesystem::path& path) {
    return ordered_json::parse(read_text_file(path));
}

std::string file_digest(const std::filesystem::path& path) {
    const std::string bytes = read_text_file(path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 failed for '" + path.string() + "'");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace dia
