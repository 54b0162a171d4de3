#include "tmixad/eval.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "tmixad/errors.hpp"

namespace tmixad {

namespace {

void check_labels(const Eigen::VectorXd& scores, const std::vector<int>& labels) {
    if (static_cast<std::size_t>(scores.size()) != labels.size())
        throw DataError("metrics: scores and labels have different lengths");
    for (int v : labels)
        if (v != 0 && v != 1) throw DataError("metrics: labels must be 0 or 1");
}

}  // namespace

double auc_roc(const Eigen::VectorXd& scores, const std::vector<int>& labels) {
    check_labels(scores, labels);
    const int n = static_cast<int>(labels.size());
    long long n_pos = std::count(labels.begin(), labels.end(), 1);
    long long n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw DataError("auc_roc: both classes must be present");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return scores(a) < scores(b); });

    // Sweep ascending score tie groups. Positives in a group beat every
    // negative strictly below it and tie the negatives inside it.
    double correct = 0.0;
    long long neg_below = 0;
    int i = 0;
    while (i < n) {
        int j = i;
        long long pos_in = 0, neg_in = 0;
        while (j < n && scores(order[j]) == scores(order[i])) {
            if (labels[order[j]] == 1) ++pos_in; else ++neg_in;
            ++j;
        }
        correct += static_cast<double>(pos_in) * static_cast<double>(neg_below) +
                   0.5 * static_cast<double>(pos_in) * static_cast<double>(neg_in);
        neg_below += neg_in;
        i = j;
    }
    return correct / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc_pr(const Eigen::VectorXd& scores, const std::vector<int>& labels) {
    check_labels(scores, labels);
    const int n = static_cast<int>(labels.size());
    long long n_pos = std::count(labels.begin(), labels.end(), 1);
    if (n_pos == 0) throw DataError("auc_pr: at least one positive label is required");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores(a) != scores(b)) return scores(a) > scores(b);
        return a < b;
    });

    double sum = 0.0;
    long long cum_pos = 0;
    for (int rank = 1; rank <= n; ++rank) {
        if (labels[order[rank - 1]] == 1) {
            ++cum_pos;
            sum += static_cast<double>(cum_pos) / static_cast<double>(rank);
        }
    }
    return sum / static_cast<double>(n_pos);
}

MetricReport evaluate(const Eigen::VectorXd& scores, const std::vector<int>& labels,
                      std::uint64_t seed) {
    MetricReport r;
    r.auc_roc = auc_roc(scores, labels);
    r.auc_pr = auc_pr(scores, labels);
    r.n_pos = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
    r.n_neg = static_cast<int>(labels.size()) - r.n_pos;
    r.seed = seed;
    return r;
}

namespace {

// method -> dataset -> mean, plus the tie-averaged ranks per dataset.
std::map<std::string, double> average_ranks(
    const std::map<std::string, std::map<std::string, double>>& means,
    const std::set<std::string>& methods, const std::set<std::string>& datasets) {
    std::map<std::string, double> rank_sum;
    for (const std::string& m : methods) rank_sum[m] = 0.0;

    for (const std::string& ds : datasets) {
        std::vector<std::pair<double, std::string>> entries;
        for (const std::string& m : methods) entries.emplace_back(means.at(m).at(ds), m);
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;  // higher mean = better rank
            return a.second < b.second;
        });
        std::size_t i = 0;
        while (i < entries.size()) {
            std::size_t j = i;
            while (j < entries.size() && entries[j].first == entries[i].first) ++j;
            double shared = 0.5 * static_cast<double>((i + 1) + j);  // average of ranks i+1..j
            for (std::size_t t = i; t < j; ++t) rank_sum[entries[t].second] += shared;
            i = j;
        }
    }
    for (auto& [m, v] : rank_sum) v /= static_cast<double>(datasets.size());
    return rank_sum;
}

}  // namespace

AggregateReport aggregate(const std::vector<RunRecord>& runs) {
    if (runs.empty()) throw DataError("aggregate: no runs");

    std::set<std::string> methods, datasets;
    for (const RunRecord& r : runs) {
        methods.insert(r.method);
        datasets.insert(r.dataset);
    }

    std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> cells;
    for (const RunRecord& r : runs) cells[{r.method, r.dataset}].push_back(&r);

    std::size_t runs_per_cell = 0;
    for (const std::string& m : methods) {
        for (const std::string& ds : datasets) {
            auto it = cells.find({m, ds});
            if (it == cells.end())
                throw DataError("aggregate: missing cell for method \"" + m +
                                "\" on dataset \"" + ds + "\"");
            if (runs_per_cell == 0) runs_per_cell = it->second.size();
            if (it->second.size() != runs_per_cell)
                throw DataError("aggregate: unequal run counts per cell");
        }
    }

    AggregateReport rep;
    for (const std::string& m : methods) {
        for (const std::string& ds : datasets) {
            const auto& cell = cells[{m, ds}];
            double roc = 0.0, pr = 0.0;
            for (const RunRecord* r : cell) {
                roc += r->auc_roc;
                pr += r->auc_pr;
            }
            rep.mean_auc_roc[m][ds] = roc / static_cast<double>(cell.size());
            rep.mean_auc_pr[m][ds] = pr / static_cast<double>(cell.size());
        }
    }
    rep.avg_rank_auc_roc = average_ranks(rep.mean_auc_roc, methods, datasets);
    rep.avg_rank_auc_pr = average_ranks(rep.mean_auc_pr, methods, datasets);
    return rep;
}

}  // namespace tmixad
