#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace amgmm {

// Normalized-energy surrogate configuration. The surrogate is a proxy
// quantity (power per unit of heat capacity and travel), not a physical
// energy; it is computed from raw columns before any standardization.
struct EnergyFeatureConfig {
    std::string power_column;                       // units W
    std::string speed_column;                       // units mm/s
    std::variant<double, std::string> specific_heat; // scalar J/(kg K) or a column name
    std::string output_column = "energy";
    bool replace_inputs = false;
};

// power / (specific_heat * speed). Speeds and heat capacities must be
// strictly positive.
double energy_feature(double power, double speed, double specific_heat);

// Output of a fitted pipeline. A distinct type so transformed rows cannot
// be fed back through transform().
struct TransformedRow {
    Eigen::VectorXd values;
};

struct PipelineConfig {
    std::optional<EnergyFeatureConfig> energy;
    bool standardize = true;
};

// Train-time feature preparation, replayed identically at inference:
// energy surrogate first, then z-score standardization with statistics
// frozen from the training rows. Immutable once fitted.
struct FeaturePipeline {
    std::optional<EnergyFeatureConfig> energy;
    bool standardize = true;

    std::vector<std::string> raw_columns;   // schema the pipeline was fitted on
    std::vector<std::string> feature_names; // transformed space, after drops
    Eigen::VectorXd column_means;           // per retained feature; empty if !standardize
    Eigen::VectorXd column_stds;            // strictly positive where present
    std::vector<std::string> dropped_columns; // zero variance on the training rows
    std::size_t fitted_on = 0;

    Eigen::Index raw_dim() const { return static_cast<Eigen::Index>(raw_columns.size()); }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(feature_names.size()); }

    TransformedRow transform(const Eigen::VectorXd& raw_row) const;
    Eigen::MatrixXd transform_matrix(const Eigen::MatrixXd& raw_rows) const;

    // Only available for standardize-only pipelines with no dropped columns.
    Eigen::VectorXd inverse_transform(const TransformedRow& row) const;
};

FeaturePipeline fit_pipeline(const Eigen::MatrixXd& rows, const std::vector<std::string>& columns,
                             const PipelineConfig& config);

// Kolmogorov-Smirnov distance between the empirical distribution of the
// series and a single Gaussian fitted to it (mean, population std).
double ks_to_fitted_gaussian(const std::vector<double>& values);

struct UnimodalityGain {
    double ks_raw = 0.0;
    double ks_energy = 0.0;
};

// Diagnostic for the surrogate's distribution-simplifying effect: lower
// ks_energy than ks_raw means the transformed series is closer to a single
// Gaussian than the raw one.
UnimodalityGain unimodality_gain(const std::vector<double>& raw_values,
                                 const std::vector<double>& transformed_values);

} // namespace amgmm
