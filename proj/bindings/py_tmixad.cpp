#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "tmixad/dataset.hpp"
#include "tmixad/eval.hpp"
#include "tmixad/model_io.hpp"
#include "tmixad/trainer.hpp"

namespace py = pybind11;
using namespace tmixad;

namespace {

Dataset matrix_dataset(const Eigen::MatrixXd& X) {
    Dataset ds;
    ds.features = X;
    ds.name = "array";
    return ds;
}

TrainConfig make_config(int K, double l, double em_tol, int em_max_iter, int epochs,
                        double lr, int hidden, int latent, int outer_iters,
                        std::uint64_t seed, const std::string& density_mode,
                        const std::string& score_mode, bool u_unsquared,
                        bool identity_embedding, bool gaussian_mixture,
                        bool no_joint_likelihood, bool no_indicator) {
    TrainConfig cfg;
    cfg.K = K;
    cfg.l = l;
    cfg.em_tol = em_tol;
    cfg.em_max_iter = em_max_iter;
    cfg.epochs = epochs;
    cfg.lr = lr;
    cfg.hidden = hidden;
    cfg.latent = latent;
    cfg.outer_iters = outer_iters;
    cfg.seed = seed;
    cfg.density_mode = density_mode_from_name(density_mode);
    cfg.score_mode = score_mode_from_name(score_mode);
    cfg.u_unsquared = u_unsquared;
    cfg.identity_embedding = identity_embedding;
    cfg.gaussian_mixture = gaussian_mixture;
    cfg.no_joint_likelihood = no_joint_likelihood;
    cfg.no_indicator = no_indicator;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(tmixad, m) {
    m.doc() = "Trimmed t-mixture anomaly detection over learned embeddings";

    py::class_<Model>(m, "Model")
        .def_property_readonly("input_dim", &Model::input_dim)
        .def_property_readonly("components",
                               [](const Model& mod) { return mod.mixture.components(); })
        .def_property_readonly("latent_dim",
                               [](const Model& mod) { return mod.mixture.latent_dim(); })
        .def(
            "score",
            [](const Model& mod, const Eigen::MatrixXd& X,
               const std::optional<std::string>& mode) {
                Dataset ds = matrix_dataset(X);
                if (mode) return score_inductive(mod, ds, score_mode_from_name(*mode));
                return score_inductive(mod, ds);
            },
            py::arg("X"), py::arg("mode") = py::none(),
            "Anomaly scores for the rows of X, higher = more anomalous. "
            "mode overrides the score mode the model was fit with "
            "('scalar' or 'vector').")
        .def(
            "save", [](const Model& mod, const std::string& path) { save_model(mod, path); },
            py::arg("path"));

    m.def(
        "fit",
        [](const Eigen::MatrixXd& X, int K, double l, double em_tol, int em_max_iter,
           int epochs, double lr, int hidden, int latent, int outer_iters,
           std::uint64_t seed, const std::string& density_mode, const std::string& score_mode,
           bool u_unsquared, bool identity_embedding, bool gaussian_mixture,
           bool no_joint_likelihood, bool no_indicator) {
            TrainConfig cfg = make_config(K, l, em_tol, em_max_iter, epochs, lr, hidden,
                                          latent, outer_iters, seed, density_mode, score_mode,
                                          u_unsquared, identity_embedding, gaussian_mixture,
                                          no_joint_likelihood, no_indicator);
            return fit(matrix_dataset(X), cfg).model;
        },
        py::arg("X"), py::arg("K") = 10, py::arg("l") = 0.01, py::arg("em_tol") = 1e-3,
        py::arg("em_max_iter") = 100, py::arg("epochs") = 100, py::arg("lr") = 1e-4,
        py::arg("hidden") = 128, py::arg("latent") = 0, py::arg("outer_iters") = 10,
        py::arg("seed") = 0, py::arg("density_mode") = "cauchy_kernel",
        py::arg("score_mode") = "vector", py::arg("u_unsquared") = false,
        py::arg("identity_embedding") = false, py::arg("gaussian_mixture") = false,
        py::arg("no_joint_likelihood") = false, py::arg("no_indicator") = false,
        "Alternating autoencoder / trimmed mixture fit on the rows of X.");

    m.def(
        "load_model", [](const std::string& path) { return load_model(path); },
        py::arg("path"));

    m.def(
        "toy",
        [](std::uint64_t seed) {
            Dataset ds = generate_group_anomaly_toy(seed);
            return py::make_tuple(ds.features, *ds.labels);
        },
        py::arg("seed") = 0,
        "Synthetic 2-D set: three spread normal clusters plus one tight "
        "anomalous cluster inside their hull. Returns (features, labels).");

    m.def(
        "auc_roc",
        [](const Eigen::VectorXd& scores, const std::vector<int>& labels) {
            return auc_roc(scores, labels);
        },
        py::arg("scores"), py::arg("labels"));

    m.def(
        "auc_pr",
        [](const Eigen::VectorXd& scores, const std::vector<int>& labels) {
            return auc_pr(scores, labels);
        },
        py::arg("scores"), py::arg("labels"));
}
