#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tmixad {

// Tabular data: N x D features, optional binary anomaly labels (1 = anomaly).
struct Dataset {
    Eigen::MatrixXd features;          // N x D, all entries finite
    std::optional<Eigen::VectorXi> labels;  // length N when present, values 0/1
    std::string name;

    int rows() const { return static_cast<int>(features.rows()); }
    int cols() const { return static_cast<int>(features.cols()); }
};

// Per-column z-score statistics fit on a training set. std entries are
// strictly positive; constant columns record std = 1.
struct StandardizationStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
};

struct SplitSpec {
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
    bool stratified = true;
};

// Raw CSV contents: header names plus the parsed numeric cells.
struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;
};

// Strict CSV reader: mandatory header, comma separated, every cell a finite
// real. Errors name the 1-based data row and the offending column by header
// name. Throws DataError.
CsvTable load_csv_table(const std::string& path);

// As above, additionally splitting off `label_column` (literal 0/1 cells)
// into Dataset::labels when given. Row order is preserved and the dataset
// name is the file stem.
Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column = {});

// Writes header f0..f{D-1} (plus `label` when labels are present) and all
// cells at 17 significant digits, atomically (temp file + rename).
void write_csv(const Dataset& ds, const std::string& path);

// (x - mean) / std per column, exact same arithmetic wherever it is applied.
Dataset apply_standardization(const Dataset& ds, const StandardizationStats& stats);

// Fits population-moment z-score stats on `train` only and applies them to
// train and every dataset in `others`. Returned list is train first, then
// the others in order.
std::pair<std::vector<Dataset>, StandardizationStats> standardize_fit_apply(
    const Dataset& train, const std::vector<Dataset>& others);

// Deterministic shuffle split. Stratified splits draw floor(n_c * fraction)
// rows per class so each side keeps the class mix within one sample. Row
// order within each side follows the original dataset.
std::pair<Dataset, Dataset> split_inductive(const Dataset& ds, const SplitSpec& spec);

// 2-D synthetic set: three spread clusters of 300 points each (std 2.0,
// centers (0,0), (10,0), (5,9), labels 0) plus one tight cluster of 30
// points (std 0.3, center (5,4), labels 1). The tight cluster sits inside
// the hull of the normal clusters, which is what makes it hard for pure
// density scores and easy for the cancellation effect of the vector score.
Dataset generate_group_anomaly_toy(std::uint64_t seed);

}  // namespace tmixad
