#include "amgmm/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "amgmm/error.hpp"
#include "amgmm/numeric.hpp"

namespace amgmm {

namespace {

Eigen::Index find_column(const std::vector<std::string>& columns, const std::string& name,
                         const char* what) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return static_cast<Eigen::Index>(i);
    }
    fail("schema_mismatch", std::string(what) + " column '" + name + "' not found in schema");
}

struct EnergyIndices {
    Eigen::Index power = -1;
    Eigen::Index speed = -1;
    Eigen::Index cp = -1; // -1 when specific heat is a scalar
    double cp_scalar = 0.0;
};

EnergyIndices resolve_energy(const EnergyFeatureConfig& config,
                             const std::vector<std::string>& columns) {
    EnergyIndices idx;
    idx.power = find_column(columns, config.power_column, "power");
    idx.speed = find_column(columns, config.speed_column, "speed");
    require(config.power_column != config.speed_column, "invalid_parameter",
            "power and speed columns must be distinct");
    if (const double* cp = std::get_if<double>(&config.specific_heat)) {
        require(*cp > 0.0, "invalid_parameter", "specific heat must be > 0");
        idx.cp_scalar = *cp;
    } else {
        idx.cp = find_column(columns, std::get<std::string>(config.specific_heat),
                             "specific heat");
    }
    return idx;
}

double energy_for_row(const Eigen::VectorXd& raw, const EnergyIndices& idx, Eigen::Index row) {
    const double cp = idx.cp >= 0 ? raw[idx.cp] : idx.cp_scalar;
    try {
        return energy_feature(raw[idx.power], raw[idx.speed], cp);
    } catch (const Error& e) {
        if (row >= 0) {
            fail(e.code(), std::string(e.what()) + " (row " + std::to_string(row + 1) + ")");
        }
        throw;
    }
}

// Raw row -> extended row (energy applied, replaced inputs removed).
void extend_row(const Eigen::VectorXd& raw, const EnergyIndices* idx,
                const EnergyFeatureConfig* config, Eigen::Index row, Eigen::VectorXd& out) {
    if (idx == nullptr) {
        out = raw;
        return;
    }
    const bool replace = config->replace_inputs;
    const Eigen::Index extended = raw.size() + (replace ? -1 : 1);
    out.resize(extended);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < raw.size(); ++j) {
        if (replace && (j == idx->power || j == idx->speed)) continue;
        out[k++] = raw[j];
    }
    out[k] = energy_for_row(raw, *idx, row);
}

std::vector<std::string> extended_names(const std::vector<std::string>& columns,
                                        const EnergyFeatureConfig* config,
                                        const EnergyIndices* idx) {
    std::vector<std::string> names;
    if (config == nullptr) {
        names = columns;
        return names;
    }
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (config->replace_inputs && (static_cast<Eigen::Index>(j) == idx->power ||
                                       static_cast<Eigen::Index>(j) == idx->speed)) {
            continue;
        }
        names.push_back(columns[j]);
    }
    require(std::find(names.begin(), names.end(), config->output_column) == names.end(),
            "invalid_parameter",
            "energy output column '" + config->output_column + "' collides with a raw column");
    names.push_back(config->output_column);
    return names;
}

} // namespace

double energy_feature(double power, double speed, double specific_heat) {
    if (!(speed > 0.0)) {
        fail("invalid_physics_input",
             "scan speed must be > 0, received " + format_double(speed));
    }
    if (!(specific_heat > 0.0)) {
        fail("invalid_physics_input",
             "specific heat must be > 0, received " + format_double(specific_heat));
    }
    return power / (specific_heat * speed);
}

FeaturePipeline fit_pipeline(const Eigen::MatrixXd& rows, const std::vector<std::string>& columns,
                             const PipelineConfig& config) {
    require(rows.cols() == static_cast<Eigen::Index>(columns.size()), "dimension_mismatch",
            "column names do not match data width");
    require(rows.rows() >= 2, "insufficient_data", "pipeline fitting needs at least 2 rows");
    require(rows.allFinite(), "invalid_parameter", "training rows contain non-finite values");
    {
        std::set<std::string> unique(columns.begin(), columns.end());
        require(unique.size() == columns.size(), "schema_mismatch", "duplicate column names");
    }

    FeaturePipeline pipeline;
    pipeline.energy = config.energy;
    pipeline.standardize = config.standardize;
    pipeline.raw_columns = columns;
    pipeline.fitted_on = static_cast<std::size_t>(rows.rows());

    EnergyIndices idx;
    const EnergyFeatureConfig* energy = config.energy ? &*config.energy : nullptr;
    if (energy != nullptr) idx = resolve_energy(*energy, columns);

    const Eigen::Index n = rows.rows();
    Eigen::VectorXd extended;
    extend_row(rows.row(0).transpose(), energy ? &idx : nullptr, energy, 0, extended);
    Eigen::MatrixXd ext(n, extended.size());
    ext.row(0) = extended.transpose();
    for (Eigen::Index i = 1; i < n; ++i) {
        extend_row(rows.row(i).transpose(), energy ? &idx : nullptr, energy, i, extended);
        ext.row(i) = extended.transpose();
    }
    const std::vector<std::string> names = extended_names(columns, energy, energy ? &idx : nullptr);

    if (!config.standardize) {
        pipeline.feature_names = names;
        return pipeline;
    }

    const Eigen::RowVectorXd mean = ext.colwise().mean();
    const Eigen::RowVectorXd std_dev =
        ((ext.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(n))
            .sqrt();

    std::vector<Eigen::Index> retained;
    for (Eigen::Index j = 0; j < ext.cols(); ++j) {
        if (std_dev[j] > 0.0) {
            retained.push_back(j);
        } else {
            pipeline.dropped_columns.push_back(names[static_cast<std::size_t>(j)]);
        }
    }
    require(!retained.empty(), "unusable_data", "every column has zero variance");

    pipeline.column_means.resize(static_cast<Eigen::Index>(retained.size()));
    pipeline.column_stds.resize(static_cast<Eigen::Index>(retained.size()));
    for (std::size_t k = 0; k < retained.size(); ++k) {
        pipeline.feature_names.push_back(names[static_cast<std::size_t>(retained[k])]);
        pipeline.column_means[static_cast<Eigen::Index>(k)] = mean[retained[k]];
        pipeline.column_stds[static_cast<Eigen::Index>(k)] = std_dev[retained[k]];
    }
    return pipeline;
}

TransformedRow FeaturePipeline::transform(const Eigen::VectorXd& raw_row) const {
    require(!raw_columns.empty(), "invalid_parameter", "pipeline is not fitted");
    if (raw_row.size() != raw_dim()) {
        fail("dimension_mismatch", "expected raw dimension " + std::to_string(raw_dim()) +
                                       ", received " + std::to_string(raw_row.size()));
    }

    EnergyIndices idx;
    const EnergyFeatureConfig* cfg = energy ? &*energy : nullptr;
    if (cfg != nullptr) idx = resolve_energy(*cfg, raw_columns);

    Eigen::VectorXd ext;
    extend_row(raw_row, cfg ? &idx : nullptr, cfg, -1, ext);

    if (!standardize) return {std::move(ext)};

    // feature_names excludes dropped columns; map by position in the
    // extended layout.
    const std::vector<std::string> names = extended_names(raw_columns, cfg, cfg ? &idx : nullptr);
    Eigen::VectorXd out(dim());
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < ext.size(); ++j) {
        if (k < dim() && names[static_cast<std::size_t>(j)] ==
                             feature_names[static_cast<std::size_t>(k)]) {
            out[k] = (ext[j] - column_means[k]) / column_stds[k];
            ++k;
        }
    }
    require(k == dim(), "dimension_mismatch", "pipeline state is inconsistent");
    return {std::move(out)};
}

Eigen::MatrixXd FeaturePipeline::transform_matrix(const Eigen::MatrixXd& raw_rows) const {
    Eigen::MatrixXd out(raw_rows.rows(), dim());
    for (Eigen::Index i = 0; i < raw_rows.rows(); ++i) {
        try {
            out.row(i) = transform(raw_rows.row(i).transpose()).values.transpose();
        } catch (const Error& e) {
            if (e.code() == "invalid_physics_input") {
                fail(e.code(), std::string(e.what()) + " (row " + std::to_string(i + 1) + ")");
            }
            throw;
        }
    }
    return out;
}

Eigen::VectorXd FeaturePipeline::inverse_transform(const TransformedRow& row) const {
    require(!energy.has_value(), "invalid_parameter",
            "inverse transform is undefined for energy pipelines");
    require(dropped_columns.empty(), "invalid_parameter",
            "inverse transform is undefined when columns were dropped");
    if (!standardize) return row.values;
    require(row.values.size() == dim(), "dimension_mismatch", "transformed width mismatch");
    return (row.values.array() * column_stds.array() + column_means.array()).matrix();
}

double ks_to_fitted_gaussian(const std::vector<double>& values) {
    require(values.size() >= 20, "invalid_parameter",
            "KS diagnostic needs at least 20 values");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= n;
    require(var > 0.0, "degenerate_series", "series has zero variance");
    const double sd = std::sqrt(var);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf((sorted[i] - mean) / sd);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        ks = std::max(ks, std::max(f - lo, hi - f));
    }
    return ks;
}

UnimodalityGain unimodality_gain(const std::vector<double>& raw_values,
                                 const std::vector<double>& transformed_values) {
    return {ks_to_fitted_gaussian(raw_values), ks_to_fitted_gaussian(transformed_values)};
}

} // namespace amgmm
