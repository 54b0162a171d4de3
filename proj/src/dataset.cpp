#include "tmixad/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tmixad/errors.hpp"
#include "tmixad/rng.hpp"

namespace tmixad {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

double parse_cell(const std::string& cell, int data_row, const std::string& column) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    bool consumed = end != begin && *end == '\0' && !cell.empty();
    if (!consumed || !std::isfinite(v))
        throw DataError("row " + std::to_string(data_row) + ", column \"" + column +
                        "\": non-numeric value \"" + cell + "\"");
    return v;
}

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

}  // namespace

CsvTable load_csv_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw DataError(path + ": file is empty, a header row is required");

    CsvTable table;
    table.header = split_line(lines[0]);
    const std::size_t ncols = table.header.size();
    const std::size_t nrows = lines.size() - 1;
    if (nrows == 0) throw DataError(path + ": no data rows");

    table.values.resize(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ncols));
    for (std::size_t r = 0; r < nrows; ++r) {
        std::vector<std::string> cells = split_line(lines[r + 1]);
        if (cells.size() != ncols)
            throw DataError("row " + std::to_string(r + 1) + " has " +
                            std::to_string(cells.size()) + " columns, expected " +
                            std::to_string(ncols));
        for (std::size_t c = 0; c < ncols; ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_cell(cells[c], static_cast<int>(r + 1), table.header[c]);
    }
    return table;
}

Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column) {
    // Parse once as strings so label cells can be checked literally before
    // any numeric conversion widens "01" or "1.0" into a valid label.
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw DataError(path + ": file is empty, a header row is required");

    std::vector<std::string> header = split_line(lines[0]);
    const std::size_t ncols = header.size();
    std::ptrdiff_t label_idx = -1;
    if (label_column) {
        auto it = std::find(header.begin(), header.end(), *label_column);
        if (it == header.end())
            throw DataError(path + ": label column \"" + *label_column + "\" not found");
        label_idx = it - header.begin();
    }

    const std::size_t nrows = lines.size() - 1;
    if (nrows == 0) throw DataError(path + ": no data rows");
    const std::size_t nfeat = ncols - (label_idx >= 0 ? 1 : 0);
    if (nfeat == 0) throw DataError(path + ": no feature columns");

    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(nfeat));
    Eigen::VectorXi labels(static_cast<Eigen::Index>(nrows));

    for (std::size_t r = 0; r < nrows; ++r) {
        std::vector<std::string> cells = split_line(lines[r + 1]);
        if (cells.size() != ncols)
            throw DataError("row " + std::to_string(r + 1) + " has " +
                            std::to_string(cells.size()) + " columns, expected " +
                            std::to_string(ncols));
        std::size_t f = 0;
        for (std::size_t c = 0; c < ncols; ++c) {
            if (static_cast<std::ptrdiff_t>(c) == label_idx) {
                if (cells[c] == "0")
                    labels(static_cast<Eigen::Index>(r)) = 0;
                else if (cells[c] == "1")
                    labels(static_cast<Eigen::Index>(r)) = 1;
                else
                    throw DataError("row " + std::to_string(r + 1) + ", column \"" + header[c] +
                                    "\": label must be 0 or 1, got \"" + cells[c] + "\"");
            } else {
                ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f++)) =
                    parse_cell(cells[c], static_cast<int>(r + 1), header[c]);
            }
        }
    }
    if (label_idx >= 0) ds.labels = std::move(labels);
    ds.name = std::filesystem::path(path).stem().string();
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::string out;
    out.reserve(static_cast<std::size_t>(ds.rows()) * (static_cast<std::size_t>(ds.cols()) + 1) * 20);
    for (int c = 0; c < ds.cols(); ++c) {
        if (c) out += ',';
        out += "f" + std::to_string(c);
    }
    if (ds.labels) out += ",label";
    out += '\n';

    char buf[64];
    for (int r = 0; r < ds.rows(); ++r) {
        for (int c = 0; c < ds.cols(); ++c) {
            if (c) out += ',';
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features(r, c));
            out += buf;
        }
        if (ds.labels) {
            out += ',';
            out += std::to_string((*ds.labels)(r));
        }
        out += '\n';
    }
    atomic_write(path, out);
}

Dataset apply_standardization(const Dataset& ds, const StandardizationStats& stats) {
    if (ds.features.cols() != stats.mean.size())
        throw DataError("standardization: dataset has " + std::to_string(ds.cols()) +
                        " columns, stats have " + std::to_string(stats.mean.size()));
    Dataset out = ds;
    for (int c = 0; c < out.cols(); ++c)
        for (int r = 0; r < out.rows(); ++r)
            out.features(r, c) = (ds.features(r, c) - stats.mean(c)) / stats.std(c);
    return out;
}

std::pair<std::vector<Dataset>, StandardizationStats> standardize_fit_apply(
    const Dataset& train, const std::vector<Dataset>& others) {
    if (train.rows() == 0) throw DataError("standardize: training set is empty");
    const int D = train.cols();
    const double n = static_cast<double>(train.rows());

    StandardizationStats stats;
    stats.mean.resize(D);
    stats.std.resize(D);
    for (int c = 0; c < D; ++c) {
        double m = train.features.col(c).sum() / n;
        double var = 0.0;
        for (int r = 0; r < train.rows(); ++r) {
            double diff = train.features(r, c) - m;
            var += diff * diff;
        }
        var /= n;  // population variance
        double s = std::sqrt(var);
        // Rounding can leave a constant column with a tiny nonzero variance;
        // treat anything at noise level as constant and map it to std 1.
        if (!(s > 1e-12 * std::max(1.0, std::abs(m)))) s = 1.0;
        stats.mean(c) = m;
        stats.std(c) = s;
    }

    std::vector<Dataset> out;
    out.reserve(others.size() + 1);
    out.push_back(apply_standardization(train, stats));
    for (const Dataset& d : others) out.push_back(apply_standardization(d, stats));
    return {std::move(out), std::move(stats)};
}

namespace {

Dataset take_rows(const Dataset& ds, const std::vector<int>& idx, const char* suffix) {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), ds.features.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) out.features.row(static_cast<Eigen::Index>(r)) = ds.features.row(idx[r]);
    if (ds.labels) {
        Eigen::VectorXi lab(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t r = 0; r < idx.size(); ++r) lab(static_cast<Eigen::Index>(r)) = (*ds.labels)(idx[r]);
        out.labels = std::move(lab);
    }
    out.name = ds.name + suffix;
    return out;
}

}  // namespace

std::pair<Dataset, Dataset> split_inductive(const Dataset& ds, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0))
        throw DataError("split: train_fraction must be in (0, 1]");
    if (spec.stratified && !ds.labels)
        throw DataError("split: stratified split requested but the dataset has no labels");

    const int N = ds.rows();
    std::mt19937_64 gen(spec.seed);
    std::vector<int> train_idx;

    if (spec.stratified) {
        // Classes are shuffled in a fixed order (0 then 1) off one generator
        // so the partition is a pure function of the seed.
        for (int cls = 0; cls <= 1; ++cls) {
            std::vector<int> members;
            for (int i = 0; i < N; ++i)
                if ((*ds.labels)(i) == cls) members.push_back(i);
            shuffle_indices(members, gen);
            int take = static_cast<int>(std::floor(members.size() * spec.train_fraction));
            train_idx.insert(train_idx.end(), members.begin(), members.begin() + take);
        }
    } else {
        std::vector<int> all(N);
        for (int i = 0; i < N; ++i) all[i] = i;
        shuffle_indices(all, gen);
        int take = static_cast<int>(std::floor(N * spec.train_fraction));
        train_idx.assign(all.begin(), all.begin() + take);
    }

    if (train_idx.empty()) throw DataError("split: train_fraction yields an empty training set");
    std::sort(train_idx.begin(), train_idx.end());

    std::vector<bool> in_train(N, false);
    for (int i : train_idx) in_train[i] = true;
    std::vector<int> test_idx;
    for (int i = 0; i < N; ++i)
        if (!in_train[i]) test_idx.push_back(i);

    return {take_rows(ds, train_idx, ":train"), take_rows(ds, test_idx, ":test")};
}

Dataset generate_group_anomaly_toy(std::uint64_t seed) {
    struct Cluster {
        double cx, cy, sd;
        int count, label;
    };
    const Cluster clusters[] = {
        {0.0, 0.0, 2.0, 300, 0},
        {10.0, 0.0, 2.0, 300, 0},
        {5.0, 9.0, 2.0, 300, 0},
        {5.0, 4.0, 0.3, 30, 1},
    };

    std::mt19937_64 gen(seed);
    Dataset ds;
    ds.features.resize(930, 2);
    Eigen::VectorXi labels(930);
    int row = 0;
    for (const Cluster& cl : clusters) {
        for (int i = 0; i < cl.count; ++i) {
            ds.features(row, 0) = cl.cx + cl.sd * normal01(gen);
            ds.features(row, 1) = cl.cy + cl.sd * normal01(gen);
            labels(row) = cl.label;
            ++row;
        }
    }
    ds.labels = std::move(labels);
    ds.name = "toy";
    return ds;
}

}  // namespace tmixad
