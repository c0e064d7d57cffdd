#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "amgmm/dataset.hpp"
#include "amgmm/features.hpp"
#include "amgmm/mixture.hpp"

namespace amgmm {

// Density model per class plus class priors; prediction compares the
// Bayes-rule posteriors and may abstain below a posterior threshold.
// Immutable once trained; every query method is safe for concurrent readers.
struct GenerativeClassifier {
    std::vector<Label> classes; // ordered; ties break toward the earlier entry
    std::vector<MixtureModel> models;
    Eigen::VectorXd priors; // nonnegative, sum to 1
    FeaturePipeline pipeline;
    std::vector<Column> raw_schema;
    Eigen::VectorXd training_medians; // per raw column, over usable training rows
    std::optional<double> reject_threshold;

    Eigen::Index num_classes() const { return static_cast<Eigen::Index>(classes.size()); }
    Eigen::Index class_index(Label label) const; // -1 when absent
};

struct PosteriorVector {
    Eigen::VectorXd values; // sum to 1, each in [0, 1]
    double log_evidence = 0.0;
};

// Stable softmax over per-class log joints (log likelihood + log prior).
PosteriorVector posterior_from_log_joints(const Eigen::VectorXd& log_joints);

struct TrainConfig {
    std::optional<int> components;        // fixed count; nullopt selects by BIC
    std::vector<int> component_candidates{1, 2, 3};
    CovarianceKind covariance_kind = CovarianceKind::full;
    bool uniform_priors = false;
    std::uint64_t seed = 0;
    double ridge = 1e-6;
    int max_iter = 500;
    double rel_tol = 1e-6;
    int n_restarts = 4;
    std::optional<double> reject_threshold;
    std::optional<EnergyFeatureConfig> energy;
    bool standardize = true;
};

// One mixture per usable class (inconclusive and unlabeled rows never
// train), empirical or uniform priors, pipeline statistics frozen on the
// training rows.
GenerativeClassifier train_classifier(const Dataset& dataset, const TrainConfig& config);

// Bayes posterior over classes for a raw-schema input row.
PosteriorVector posterior(const Eigen::VectorXd& raw_row, const GenerativeClassifier& clf);

// Argmax class, or Label::inconclusive when the top posterior falls below
// the reject threshold. Exact ties go to the earlier class.
Label classify(const Eigen::VectorXd& raw_row, const GenerativeClassifier& clf);
Label decide_from_posterior(const PosteriorVector& post, const GenerativeClassifier& clf);

struct MetricsReport {
    std::vector<Label> classes;
    std::size_t n_rows = 0;
    std::size_t n_scored = 0;            // usable label, not rejected
    std::size_t n_rejected = 0;          // usable label, rejected prediction
    std::size_t n_inconclusive_labels = 0;
    std::size_t n_unlabeled = 0;
    bool accuracy_defined = false;
    double accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion; // true x predicted, scored rows
    std::vector<double> precision; // NaN when the denominator is empty
    std::vector<double> recall;
    // Mean -log posterior of the true class over usable rows (rejected
    // rows included; abstention does not change the posterior).
    double mean_true_class_nll = 0.0;
};

MetricsReport evaluate(const GenerativeClassifier& clf, const Dataset& dataset);

struct GridBounds {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
};

struct BoundaryGrid {
    std::string x_column, y_column;
    std::vector<Label> classes;
    std::vector<std::pair<std::string, double>> fill_used; // non-axis raw columns
    struct Cell {
        double x = 0.0, y = 0.0;
        Eigen::VectorXd posterior;
        Label predicted = Label::unlabeled;
    };
    std::vector<Cell> cells; // y-major, x fastest, both ascending
};

// Posterior surface over two raw columns with the remaining features held
// at fill values (training medians unless overridden).
BoundaryGrid decision_boundary_grid(const GenerativeClassifier& clf, const std::string& x_column,
                                    const std::string& y_column, const GridBounds& bounds,
                                    int resolution,
                                    const std::map<std::string, double>& fill_overrides = {});

} // namespace amgmm
