#include "tmixad/model_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "tmixad/dataset.hpp"
#include "tmixad/errors.hpp"

namespace tmixad {

using nlohmann::json;

namespace {

void atomic_write(const std::string& path, const std::string& contents) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + tmp);
        out << contents;
        if (!out.good()) throw DataError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw DataError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw DataError(std::string("model file: ") + what + " must be a 2-D array");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols)
            throw DataError(std::string("model file: ragged rows in ") + what);
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw DataError(std::string("model file: ") + what + " must be an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
    return v;
}

json config_to_json(const TrainConfig& c) {
    return json{{"K", c.K},
                {"l", c.l},
                {"em_tol", c.em_tol},
                {"em_max_iter", c.em_max_iter},
                {"epochs", c.epochs},
                {"lr", c.lr},
                {"hidden", c.hidden},
                {"latent", c.latent},
                {"outer_iters", c.outer_iters},
                {"seed", c.seed},
                {"density_mode", density_mode_name(c.density_mode)},
                {"score_mode", score_mode_name(c.score_mode)},
                {"u_unsquared", c.u_unsquared},
                {"identity_embedding", c.identity_embedding},
                {"gaussian_mixture", c.gaussian_mixture},
                {"no_joint_likelihood", c.no_joint_likelihood},
                {"no_indicator", c.no_indicator}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.K = j.at("K").get<int>();
    c.l = j.at("l").get<double>();
    c.em_tol = j.at("em_tol").get<double>();
    c.em_max_iter = j.at("em_max_iter").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.lr = j.at("lr").get<double>();
    c.hidden = j.at("hidden").get<int>();
    c.latent = j.at("latent").get<int>();
    c.outer_iters = j.at("outer_iters").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.density_mode = density_mode_from_name(j.at("density_mode").get<std::string>());
    c.score_mode = score_mode_from_name(j.at("score_mode").get<std::string>());
    c.u_unsquared = j.at("u_unsquared").get<bool>();
    c.identity_embedding = j.at("identity_embedding").get<bool>();
    c.gaussian_mixture = j.at("gaussian_mixture").get<bool>();
    c.no_joint_likelihood = j.at("no_joint_likelihood").get<bool>();
    c.no_indicator = j.at("no_indicator").get<bool>();
    return c;
}

}  // namespace

std::string density_mode_name(DensityMode mode) {
    switch (mode) {
        case DensityMode::CauchyKernel: return "cauchy_kernel";
        case DensityMode::StudentT: return "student_t";
        case DensityMode::Gaussian: return "gaussian";
    }
    return "cauchy_kernel";
}

DensityMode density_mode_from_name(const std::string& name) {
    if (name == "cauchy_kernel") return DensityMode::CauchyKernel;
    if (name == "student_t") return DensityMode::StudentT;
    if (name == "gaussian") return DensityMode::Gaussian;
    throw UsageError("unknown density mode \"" + name +
                     "\" (expected cauchy_kernel or student_t)");
}

std::string score_mode_name(ScoreMode mode) {
    return mode == ScoreMode::Scalar ? "scalar" : "vector";
}

ScoreMode score_mode_from_name(const std::string& name) {
    if (name == "scalar") return ScoreMode::Scalar;
    if (name == "vector") return ScoreMode::Vector;
    throw UsageError("unknown score mode \"" + name + "\" (expected scalar or vector)");
}

void save_model(const Model& model, const std::string& path) {
    json doc;
    doc["schema_version"] = kModelSchemaVersion;
    doc["config"] = config_to_json(model.config);
    doc["standardization"] = {{"mean", vector_to_json(model.standardization.mean)},
                              {"std", vector_to_json(model.standardization.std)}};
    if (model.config.identity_embedding) {
        doc["encoder"] = nullptr;
    } else {
        doc["encoder"] = {{"enc_w1", matrix_to_json(model.encoder.enc_w1)},
                          {"enc_b1", vector_to_json(model.encoder.enc_b1)},
                          {"enc_w2", matrix_to_json(model.encoder.enc_w2)},
                          {"enc_b2", vector_to_json(model.encoder.enc_b2)},
                          {"dec_w1", matrix_to_json(model.encoder.dec_w1)},
                          {"dec_b1", vector_to_json(model.encoder.dec_b1)},
                          {"dec_w2", matrix_to_json(model.encoder.dec_w2)},
                          {"dec_b2", vector_to_json(model.encoder.dec_b2)}};
    }
    doc["mixture"] = {{"weights", vector_to_json(model.mixture.weights)},
                      {"prototypes", matrix_to_json(model.mixture.prototypes)},
                      {"scales", matrix_to_json(model.mixture.scales)},
                      {"density_mode", density_mode_name(model.mixture.density_mode)},
                      {"u_unsquared", model.mixture.u_unsquared}};
    atomic_write(path, doc.dump(2) + "\n");
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("model file " + path + " is not valid JSON: " + e.what());
    }

    try {
        int version = doc.at("schema_version").get<int>();
        if (version != kModelSchemaVersion)
            throw DataError("model file schema_version " + std::to_string(version) +
                            " is not supported (expected " +
                            std::to_string(kModelSchemaVersion) + ")");
        Model m;
        m.config = config_from_json(doc.at("config"));
        m.standardization.mean = vector_from_json(doc.at("standardization").at("mean"), "mean");
        m.standardization.std = vector_from_json(doc.at("standardization").at("std"), "std");
        if (!doc.at("encoder").is_null()) {
            const json& e = doc.at("encoder");
            m.encoder.enc_w1 = matrix_from_json(e.at("enc_w1"), "enc_w1");
            m.encoder.enc_b1 = vector_from_json(e.at("enc_b1"), "enc_b1");
            m.encoder.enc_w2 = matrix_from_json(e.at("enc_w2"), "enc_w2");
            m.encoder.enc_b2 = vector_from_json(e.at("enc_b2"), "enc_b2");
            m.encoder.dec_w1 = matrix_from_json(e.at("dec_w1"), "dec_w1");
            m.encoder.dec_b1 = vector_from_json(e.at("dec_b1"), "dec_b1");
            m.encoder.dec_w2 = matrix_from_json(e.at("dec_w2"), "dec_w2");
            m.encoder.dec_b2 = vector_from_json(e.at("dec_b2"), "dec_b2");
        } else if (!m.config.identity_embedding) {
            throw DataError("model file: encoder tensors missing");
        }
        const json& mix = doc.at("mixture");
        m.mixture.weights = vector_from_json(mix.at("weights"), "weights");
        m.mixture.prototypes = matrix_from_json(mix.at("prototypes"), "prototypes");
        m.mixture.scales = matrix_from_json(mix.at("scales"), "scales");
        m.mixture.density_mode = density_mode_from_name(mix.at("density_mode").get<std::string>());
        m.mixture.u_unsquared = mix.at("u_unsquared").get<bool>();
        if (m.mixture.prototypes.rows() != m.mixture.weights.size() ||
            m.mixture.scales.rows() != m.mixture.weights.size() ||
            m.mixture.scales.cols() != m.mixture.prototypes.cols())
            throw DataError("model file: inconsistent mixture shapes");
        return m;
    } catch (const json::exception& e) {
        throw DataError("model file " + path + " is malformed: " + e.what());
    }
}

void write_scores_csv(const Eigen::VectorXd& scores, const std::string& path) {
    std::string out = "index,score\n";
    char buf[64];
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g\n", static_cast<long long>(i), scores(i));
        out += buf;
    }
    atomic_write(path, out);
}

Eigen::VectorXd read_scores_csv(const std::string& path) {
    CsvTable table = load_csv_table(path);
    if (table.header.size() != 2 || table.header[0] != "index" || table.header[1] != "score")
        throw DataError(path + ": expected an index,score header");
    return table.values.col(1);
}

void write_training_log(const std::vector<OuterIterationLog>& log, const std::string& path) {
    json doc;
    doc["schema_version"] = kModelSchemaVersion;
    json iters = json::array();
    for (const OuterIterationLog& e : log) {
        iters.push_back(json{{"iteration", e.iteration},
                             {"J", e.j},
                             {"joint_loss", e.joint_loss},
                             {"trimmed_count", e.trimmed_count},
                             {"em_iters", e.em_iters}});
    }
    doc["iterations"] = std::move(iters);
    atomic_write(path, doc.dump(2) + "\n");
}

std::string metric_report_json(const MetricReport& report) {
    json doc{{"auc_roc", report.auc_roc},
             {"auc_pr", report.auc_pr},
             {"n_pos", report.n_pos},
             {"n_neg", report.n_neg}};
    return doc.dump(2) + "\n";
}

void write_metric_report(const MetricReport& report, const std::string& path) {
    atomic_write(path, metric_report_json(report));
}

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw UsageError("config key " + key + ": expected a boolean, got \"" + value + "\"");
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        if constexpr (std::is_floating_point_v<T>) {
            double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            return static_cast<T>(v);
        } else {
            long long v = std::stoll(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            return static_cast<T>(v);
        }
    } catch (const std::exception&) {
        throw UsageError("config key " + key + ": cannot parse value \"" + value + "\"");
    }
}

}  // namespace

TrainConfig parse_config_file(const std::string& path, const TrainConfig& base) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);

    TrainConfig c = base;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto strip = [](std::string s) {
            std::size_t a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            std::size_t b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        std::string stripped = strip(line);
        if (stripped.empty()) continue;
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = strip(stripped.substr(0, eq));
        std::string value = strip(stripped.substr(eq + 1));

        if (key == "K") c.K = parse_number<int>(value, key);
        else if (key == "l") c.l = parse_number<double>(value, key);
        else if (key == "em_tol") c.em_tol = parse_number<double>(value, key);
        else if (key == "em_max_iter") c.em_max_iter = parse_number<int>(value, key);
        else if (key == "epochs") c.epochs = parse_number<int>(value, key);
        else if (key == "lr") c.lr = parse_number<double>(value, key);
        else if (key == "hidden") c.hidden = parse_number<int>(value, key);
        else if (key == "latent") c.latent = parse_number<int>(value, key);
        else if (key == "outer_iters") c.outer_iters = parse_number<int>(value, key);
        else if (key == "seed") c.seed = parse_number<long long>(value, key);
        else if (key == "density_mode") c.density_mode = density_mode_from_name(value);
        else if (key == "score_mode") c.score_mode = score_mode_from_name(value);
        else if (key == "u_unsquared") c.u_unsquared = parse_bool(value, key);
        else if (key == "identity_embedding") c.identity_embedding = parse_bool(value, key);
        else if (key == "gaussian_mixture") c.gaussian_mixture = parse_bool(value, key);
        else if (key == "no_joint_likelihood") c.no_joint_likelihood = parse_bool(value, key);
        else if (key == "no_indicator") c.no_indicator = parse_bool(value, key);
        else throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key \"" + key + "\"");
    }
    return c;
}

}  // namespace tmixad
