#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tmixad {

struct MetricReport {
    double auc_roc = 0.0;
    double auc_pr = 0.0;
    int n_pos = 0;
    int n_neg = 0;
    std::uint64_t seed = 0;
};

// Exact Mann-Whitney statistic: P(score_pos > score_neg) + 0.5 P(tie).
// Every partial sum is a multiple of 0.5 below 2^53, so the result matches a
// brute-force pairwise count bit for bit. Throws DataError unless both
// classes are present.
double auc_roc(const Eigen::VectorXd& scores, const std::vector<int>& labels);

// Average precision with deterministic ranking: descending score, ascending
// index on ties. Throws DataError when there is no positive label.
double auc_pr(const Eigen::VectorXd& scores, const std::vector<int>& labels);

MetricReport evaluate(const Eigen::VectorXd& scores, const std::vector<int>& labels,
                      std::uint64_t seed = 0);

// One fit/score/eval outcome used by aggregation.
struct RunRecord {
    std::string dataset;
    std::string method;
    std::uint64_t seed = 0;
    double auc_roc = 0.0;
    double auc_pr = 0.0;
};

// Seed means per (method, dataset) and average ranks per method across
// datasets (rank 1 = highest mean, ties share the average rank).
struct AggregateReport {
    std::map<std::string, std::map<std::string, double>> mean_auc_roc;  // method -> dataset -> mean
    std::map<std::string, std::map<std::string, double>> mean_auc_pr;
    std::map<std::string, double> avg_rank_auc_roc;  // method -> mean rank
    std::map<std::string, double> avg_rank_auc_pr;
};

// Requires a full grid: every method must cover every dataset with the same
// number of runs. Throws DataError otherwise.
AggregateReport aggregate(const std::vector<RunRecord>& runs);

}  // namespace tmixad
