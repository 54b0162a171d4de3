// tmixad command line front end.
//
// Subcommands:
//   fit    train a model on a CSV and write model + training log JSON
//   score  score a CSV with a saved model, write index,score CSV
//   eval   AUC-ROC / AUC-PR of a scores CSV against labels
//   toy    generate the 2-D group-anomaly synthetic dataset
//   bench  fit/score/eval every CSV in a directory over 3 seeds
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "tmixad/dataset.hpp"
#include "tmixad/errors.hpp"
#include "tmixad/eval.hpp"
#include "tmixad/model_io.hpp"
#include "tmixad/trainer.hpp"

namespace {

using namespace tmixad;
using nlohmann::json;

// Config flags shared by fit and bench. Only flags the user actually passed
// override the config file, which overrides the defaults.
struct ConfigFlags {
    std::string config_file;

    void attach(CLI::App* cmd, TrainConfig& cfg) {
        cmd->add_option("--config", config_file, "flat key=value config file");
        cmd->add_option("--K", cfg.K, "mixture components");
        cmd->add_option("--l", cfg.l, "trimmed outlier fraction in [0,1)");
        cmd->add_option("--em-tol", cfg.em_tol, "EM convergence tolerance");
        cmd->add_option("--em-max-iter", cfg.em_max_iter, "EM iteration cap");
        cmd->add_option("--epochs", cfg.epochs, "encoder epochs per outer iteration");
        cmd->add_option("--lr", cfg.lr, "Adam learning rate");
        cmd->add_option("--hidden", cfg.hidden, "encoder hidden width");
        cmd->add_option("--latent", cfg.latent, "latent width, 0 = min(D, 8)");
        cmd->add_option("--outer-iters", cfg.outer_iters, "alternating outer iterations");
        cmd->add_option("--seed", cfg.seed, "random seed");
        cmd->add_option("--density-mode", density_name, "cauchy_kernel or student_t");
        cmd->add_option("--score-mode", score_name, "scalar or vector");
        cmd->add_flag("--u-unsquared", cfg.u_unsquared,
                      "EM scale factor uses the unsquared Mahalanobis distance");
        cmd->add_flag("--identity-embedding", cfg.identity_embedding,
                      "skip the encoder, mixture runs on standardized features");
        cmd->add_option("--ablation", ablation,
                        "gaussian_mixture, no_joint_likelihood or no_indicator");
    }

    // Re-applies precedence: defaults, then file, then explicit flags.
    TrainConfig resolve(CLI::App* cmd, const TrainConfig& flag_values) {
        TrainConfig cfg;
        if (!config_file.empty()) cfg = parse_config_file(config_file, cfg);

        auto passed = [&](const std::string& name) { return cmd->count(name) > 0; };
        if (passed("--K")) cfg.K = flag_values.K;
        if (passed("--l")) cfg.l = flag_values.l;
        if (passed("--em-tol")) cfg.em_tol = flag_values.em_tol;
        if (passed("--em-max-iter")) cfg.em_max_iter = flag_values.em_max_iter;
        if (passed("--epochs")) cfg.epochs = flag_values.epochs;
        if (passed("--lr")) cfg.lr = flag_values.lr;
        if (passed("--hidden")) cfg.hidden = flag_values.hidden;
        if (passed("--latent")) cfg.latent = flag_values.latent;
        if (passed("--outer-iters")) cfg.outer_iters = flag_values.outer_iters;
        if (passed("--seed")) cfg.seed = flag_values.seed;
        if (passed("--density-mode")) cfg.density_mode = density_mode_from_name(density_name);
        if (passed("--score-mode")) cfg.score_mode = score_mode_from_name(score_name);
        if (passed("--u-unsquared")) cfg.u_unsquared = flag_values.u_unsquared;
        if (passed("--identity-embedding")) cfg.identity_embedding = flag_values.identity_embedding;
        if (passed("--ablation")) {
            if (ablation == "gaussian_mixture") cfg.gaussian_mixture = true;
            else if (ablation == "no_joint_likelihood") cfg.no_joint_likelihood = true;
            else if (ablation == "no_indicator") cfg.no_indicator = true;
            else throw UsageError("unknown ablation \"" + ablation + "\"");
        }
        return cfg;
    }

private:
    std::string density_name, score_name, ablation;
};

std::optional<std::string> optional_name(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return s;
}

int run_fit(const std::string& train_csv, const std::string& out_model,
            const std::string& out_log, const std::string& label_column,
            const TrainConfig& cfg) {
    Dataset train = load_csv(train_csv, optional_name(label_column));
    FitResult res = fit(train, cfg);
    save_model(res.model, out_model);
    if (!out_log.empty()) write_training_log(res.log, out_log);
    std::fprintf(stderr, "fit: %d rows, %d features, %d outer iterations, model -> %s\n",
                 train.rows(), train.cols(), static_cast<int>(res.log.size()),
                 out_model.c_str());
    return 0;
}

int run_score(const std::string& model_path, const std::string& data_csv,
              const std::string& out_csv, const std::string& mode_name,
              const std::string& label_column) {
    Model model = load_model(model_path);
    Dataset data = load_csv(data_csv, optional_name(label_column));
    ScoreMode mode = mode_name.empty() ? model.config.score_mode
                                       : score_mode_from_name(mode_name);
    Eigen::VectorXd scores = score_inductive(model, data, mode);
    write_scores_csv(scores, out_csv);
    return 0;
}

std::vector<int> labels_from_csv(const std::string& path, const std::string& label_column) {
    CsvTable table = load_csv_table(path);
    std::size_t col = 0;
    if (!label_column.empty()) {
        auto it = std::find(table.header.begin(), table.header.end(), label_column);
        if (it == table.header.end())
            throw DataError(path + ": label column \"" + label_column + "\" not found");
        col = static_cast<std::size_t>(it - table.header.begin());
    } else if (table.header.size() != 1) {
        throw DataError(path + ": has " + std::to_string(table.header.size()) +
                        " columns, pass --label-column to pick one");
    }
    std::vector<int> labels(static_cast<std::size_t>(table.values.rows()));
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        double v = table.values(r, static_cast<Eigen::Index>(col));
        if (v == 0.0) labels[static_cast<std::size_t>(r)] = 0;
        else if (v == 1.0) labels[static_cast<std::size_t>(r)] = 1;
        else throw DataError(path + ": row " + std::to_string(r + 1) + ": label must be 0 or 1");
    }
    return labels;
}

int run_eval(const std::string& scores_csv, const std::string& labels_csv,
             const std::string& label_column, const std::string& out_json) {
    Eigen::VectorXd scores = read_scores_csv(scores_csv);
    std::vector<int> labels = labels_from_csv(labels_csv, label_column);
    if (static_cast<std::size_t>(scores.size()) != labels.size())
        throw DataError("eval: " + std::to_string(scores.size()) + " scores but " +
                        std::to_string(labels.size()) + " labels");
    MetricReport report = evaluate(scores, labels);
    if (out_json.empty()) std::cout << metric_report_json(report);
    else write_metric_report(report, out_json);
    return 0;
}

int run_toy(std::uint64_t seed, const std::string& out_csv) {
    write_csv(generate_group_anomaly_toy(seed), out_csv);
    return 0;
}

int run_bench(const std::string& dir, const std::string& out_json,
              const std::string& label_column, int seeds, double train_fraction,
              const TrainConfig& base_cfg) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("bench: not a directory: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("bench: no .csv files in " + dir);

    using clock = std::chrono::steady_clock;
    std::vector<RunRecord> records;
    json runs = json::array();

    for (const std::string& file : files) {
        Dataset ds = load_csv(file, label_column);
        for (int s = 1; s <= seeds; ++s) {
            SplitSpec split{train_fraction, static_cast<std::uint64_t>(s), true};
            auto [train, test] = split_inductive(ds, split);
            if (!test.labels || test.labels->sum() == 0 || test.labels->sum() == test.rows())
                throw DataError("bench: " + ds.name + " split seed " + std::to_string(s) +
                                " left a single-class test set");

            TrainConfig cfg = base_cfg;
            cfg.seed = static_cast<std::uint64_t>(s);
            Dataset train_features = train;
            train_features.labels.reset();

            auto t0 = clock::now();
            FitResult res = fit(train_features, cfg);
            double fit_seconds = std::chrono::duration<double>(clock::now() - t0).count();

            std::vector<int> labels(test.labels->data(), test.labels->data() + test.rows());
            for (ScoreMode mode : {ScoreMode::Scalar, ScoreMode::Vector}) {
                auto t1 = clock::now();
                Eigen::VectorXd scores = score_inductive(res.model, test, mode);
                double score_seconds = std::chrono::duration<double>(clock::now() - t1).count();
                MetricReport rep = evaluate(scores, labels, cfg.seed);

                RunRecord rec;
                rec.dataset = ds.name;
                rec.method = score_mode_name(mode);
                rec.seed = cfg.seed;
                rec.auc_roc = rep.auc_roc;
                rec.auc_pr = rep.auc_pr;
                records.push_back(rec);
                runs.push_back(json{{"dataset", rec.dataset},
                                    {"method", rec.method},
                                    {"seed", rec.seed},
                                    {"auc_roc", rec.auc_roc},
                                    {"auc_pr", rec.auc_pr},
                                    {"fit_seconds", fit_seconds},
                                    {"score_seconds", score_seconds}});
            }
        }
    }

    AggregateReport agg = aggregate(records);
    json agg_json;
    agg_json["auc_roc"] = {{"mean", agg.mean_auc_roc}, {"avg_rank", agg.avg_rank_auc_roc}};
    agg_json["auc_pr"] = {{"mean", agg.mean_auc_pr}, {"avg_rank", agg.avg_rank_auc_pr}};
    json doc{{"runs", runs}, {"aggregate", agg_json}};

    std::string text = doc.dump(2) + "\n";
    if (out_json.empty()) {
        std::cout << text;
    } else {
        std::string tmp = out_json + ".tmp";
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + tmp);
        out << text;
        out.close();
        fs::rename(tmp, out_json);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anomaly detection with trimmed t-mixtures over learned embeddings"};
    app.require_subcommand(1);

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "train a model on a CSV");
    std::string fit_csv, fit_model, fit_log, fit_label;
    TrainConfig fit_flags;
    ConfigFlags fit_config;
    fit_cmd->add_option("train_csv", fit_csv, "training data CSV")->required();
    fit_cmd->add_option("--out", fit_model, "output model JSON")->required();
    fit_cmd->add_option("--log", fit_log, "output training log JSON");
    fit_cmd->add_option("--label-column", fit_label, "column to exclude from the features");
    fit_config.attach(fit_cmd, fit_flags);

    // score
    auto* score_cmd = app.add_subcommand("score", "score a CSV with a saved model");
    std::string score_model, score_csv, score_out, score_mode, score_label;
    score_cmd->add_option("model", score_model, "model JSON from fit")->required();
    score_cmd->add_option("data_csv", score_csv, "data to score")->required();
    score_cmd->add_option("--out", score_out, "output scores CSV")->required();
    score_cmd->add_option("--mode", score_mode, "scalar or vector (default: the model's)");
    score_cmd->add_option("--label-column", score_label, "column to exclude from the features");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "metrics for a scores CSV");
    std::string eval_scores, eval_labels, eval_label_col = "label", eval_out;
    eval_cmd->add_option("scores_csv", eval_scores, "index,score CSV from score")->required();
    eval_cmd->add_option("--labels", eval_labels, "CSV holding the ground-truth labels")->required();
    eval_cmd->add_option("--label-column", eval_label_col,
                         "label column name (ignored for single-column files)");
    eval_cmd->add_option("--out", eval_out, "output metrics JSON (default: stdout)");

    // toy
    auto* toy_cmd = app.add_subcommand("toy", "write the synthetic group-anomaly dataset");
    std::uint64_t toy_seed = 0;
    std::string toy_out;
    toy_cmd->add_option("--seed", toy_seed, "generator seed");
    toy_cmd->add_option("--out", toy_out, "output CSV")->required();

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "fit/score/eval every CSV in a directory");
    std::string bench_dir, bench_out, bench_label = "label";
    int bench_seeds = 3;
    double bench_fraction = 0.7;
    TrainConfig bench_flags;
    ConfigFlags bench_config;
    bench_cmd->add_option("dataset_dir", bench_dir, "directory of labeled CSVs")->required();
    bench_cmd->add_option("--out", bench_out, "output report JSON (default: stdout)");
    bench_cmd->add_option("--label-column", bench_label, "label column in every CSV");
    bench_cmd->add_option("--seeds", bench_seeds, "number of seeds (1..n)");
    bench_cmd->add_option("--train-fraction", bench_fraction, "stratified split fraction");
    bench_config.attach(bench_cmd, bench_flags);

    try {
        app.parse(argc, argv);
        if (*fit_cmd)
            return run_fit(fit_csv, fit_model, fit_log, fit_label,
                           fit_config.resolve(fit_cmd, fit_flags));
        if (*score_cmd)
            return run_score(score_model, score_csv, score_out, score_mode, score_label);
        if (*eval_cmd) return run_eval(eval_scores, eval_labels, eval_label_col, eval_out);
        if (*toy_cmd) return run_toy(toy_seed, toy_out);
        if (*bench_cmd)
            return run_bench(bench_dir, bench_out, bench_label, bench_seeds, bench_fraction,
                             bench_config.resolve(bench_cmd, bench_flags));
        return 2;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // --help exits cleanly, parse errors are usage errors
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
