#pragma once

#include <string>
#include <vector>

#include "tmixad/eval.hpp"
#include "tmixad/trainer.hpp"

namespace tmixad {

inline constexpr int kModelSchemaVersion = 1;

// Single JSON document with decimal arrays: schema_version, config,
// standardization, encoder tensors (null under identity_embedding), mixture.
// Serialization is byte deterministic (sorted keys, shortest round-trip
// number formatting) and round-trips every double bit exactly.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// index,score rows in input order, scores at 17 significant digits. Written
// atomically.
void write_scores_csv(const Eigen::VectorXd& scores, const std::string& path);

// Reads a scores CSV back (the `score` column of an index,score file).
Eigen::VectorXd read_scores_csv(const std::string& path);

// {"schema_version":1,"iterations":[{iteration,J,joint_loss,trimmed_count,
// em_iters}...]} with no timestamps, so identical fits produce identical
// logs.
void write_training_log(const std::vector<OuterIterationLog>& log, const std::string& path);

// Metrics JSON for a single evaluation.
void write_metric_report(const MetricReport& report, const std::string& path);
std::string metric_report_json(const MetricReport& report);

// Flat key=value config file, keys named exactly like TrainConfig fields,
// '#' starts a comment. Unknown keys and unparseable values raise UsageError.
// Values in `base` are overwritten by the file.
TrainConfig parse_config_file(const std::string& path, const TrainConfig& base);

// Enum spellings used across the CLI, config files and the model format.
std::string density_mode_name(DensityMode mode);
DensityMode density_mode_from_name(const std::string& name);
std::string score_mode_name(ScoreMode mode);
ScoreMode score_mode_from_name(const std::string& name);

}  // namespace tmixad
