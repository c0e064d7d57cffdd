#include "amgmm/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "amgmm/error.hpp"

namespace amgmm {

namespace {

using nlohmann::json;

json to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(row);
    }
    return out;
}

Eigen::VectorXd vector_from(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
    }
    return v;
}

Eigen::MatrixXd matrix_from(const json& j) {
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    require(rows > 0, "model_format", "empty matrix in model file");
    const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j.at(static_cast<std::size_t>(i));
        require(static_cast<Eigen::Index>(row.size()) == cols, "model_format",
                "ragged matrix in model file");
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return m;
}

Label label_from_name(const std::string& name) {
    if (name == "no_defect") return Label::no_defect;
    if (name == "defect") return Label::defect;
    if (name == "inconclusive") return Label::inconclusive;
    if (name == "unlabeled") return Label::unlabeled;
    fail("model_format", "unknown label '" + name + "' in model file");
}

json mixture_to_json(const MixtureModel& model) {
    json out;
    out["covariance_kind"] = covariance_kind_name(model.covariance_kind);
    out["weights"] = to_json(model.weights);
    json comps = json::array();
    for (const auto& c : model.components) {
        comps.push_back({{"mean", to_json(c.mean)}, {"covariance", to_json(c.covariance)}});
    }
    out["components"] = std::move(comps);
    out["fit"] = {{"n_iterations", model.fit_info.n_iterations},
                  {"final_avg_loglik", model.fit_info.final_avg_loglik},
                  {"loglik_trace", model.fit_info.loglik_trace},
                  {"converged", model.fit_info.converged},
                  {"seed", model.fit_info.seed},
                  {"ridge_used", model.fit_info.ridge_used},
                  {"restart_index", model.fit_info.restart_index}};
    return out;
}

MixtureModel mixture_from_json(const json& j) {
    MixtureModel model;
    model.covariance_kind = covariance_kind_from_name(j.at("covariance_kind").get<std::string>());
    model.weights = vector_from(j.at("weights"));
    std::size_t index = 0;
    for (const json& comp : j.at("components")) {
        model.components.push_back(make_gaussian(vector_from(comp.at("mean")),
                                                 matrix_from(comp.at("covariance")),
                                                 "component " + std::to_string(index++)));
    }
    require(model.weights.size() == static_cast<Eigen::Index>(model.components.size()),
            "model_format", "weight/component count mismatch");
    const json& fit = j.at("fit");
    model.fit_info.n_iterations = fit.at("n_iterations").get<int>();
    model.fit_info.final_avg_loglik = fit.at("final_avg_loglik").get<double>();
    model.fit_info.loglik_trace = fit.at("loglik_trace").get<std::vector<double>>();
    model.fit_info.converged = fit.at("converged").get<bool>();
    model.fit_info.seed = fit.at("seed").get<std::uint64_t>();
    model.fit_info.ridge_used = fit.at("ridge_used").get<double>();
    model.fit_info.restart_index = fit.at("restart_index").get<int>();
    return model;
}

json pipeline_to_json(const FeaturePipeline& pipeline) {
    json out;
    if (pipeline.energy.has_value()) {
        const auto& e = *pipeline.energy;
        json energy = {{"power_column", e.power_column},
                       {"speed_column", e.speed_column},
                       {"output_column", e.output_column},
                       {"replace_inputs", e.replace_inputs}};
        if (const double* cp = std::get_if<double>(&e.specific_heat)) {
            energy["specific_heat"] = *cp;
        } else {
            energy["specific_heat_column"] = std::get<std::string>(e.specific_heat);
        }
        out["energy"] = std::move(energy);
    } else {
        out["energy"] = nullptr;
    }
    out["standardize"] = pipeline.standardize;
    out["raw_columns"] = pipeline.raw_columns;
    out["feature_names"] = pipeline.feature_names;
    out["column_means"] = to_json(pipeline.column_means);
    out["column_stds"] = to_json(pipeline.column_stds);
    out["dropped_columns"] = pipeline.dropped_columns;
    out["fitted_on"] = pipeline.fitted_on;
    return out;
}

FeaturePipeline pipeline_from_json(const json& j) {
    FeaturePipeline pipeline;
    const json& energy = j.at("energy");
    if (!energy.is_null()) {
        EnergyFeatureConfig e;
        e.power_column = energy.at("power_column").get<std::string>();
        e.speed_column = energy.at("speed_column").get<std::string>();
        e.output_column = energy.at("output_column").get<std::string>();
        e.replace_inputs = energy.at("replace_inputs").get<bool>();
        if (energy.contains("specific_heat")) {
            e.specific_heat = energy.at("specific_heat").get<double>();
        } else {
            e.specific_heat = energy.at("specific_heat_column").get<std::string>();
        }
        pipeline.energy = std::move(e);
    }
    pipeline.standardize = j.at("standardize").get<bool>();
    pipeline.raw_columns = j.at("raw_columns").get<std::vector<std::string>>();
    pipeline.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    pipeline.column_means = vector_from(j.at("column_means"));
    pipeline.column_stds = vector_from(j.at("column_stds"));
    pipeline.dropped_columns = j.at("dropped_columns").get<std::vector<std::string>>();
    pipeline.fitted_on = j.at("fitted_on").get<std::size_t>();
    return pipeline;
}

} // namespace

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path) {
    const GenerativeClassifier& clf = artifact.classifier;
    json doc;
    doc["format_version"] = kModelFormatVersion;

    json classes = json::array();
    for (Label l : clf.classes) classes.push_back(label_name(l));
    json models = json::array();
    for (const auto& model : clf.models) models.push_back(mixture_to_json(model));
    json schema = json::array();
    for (const auto& col : clf.raw_schema) {
        schema.push_back({{"name", col.name}, {"unit", col.unit}});
    }

    doc["classifier"] = {
        {"classes", std::move(classes)},
        {"priors", to_json(clf.priors)},
        {"models", std::move(models)},
        {"raw_schema", std::move(schema)},
        {"training_medians", to_json(clf.training_medians)},
        {"reject_threshold",
         clf.reject_threshold.has_value() ? json(*clf.reject_threshold) : json(nullptr)}};
    doc["pipeline"] = pipeline_to_json(clf.pipeline);
    doc["provenance"] = {{"seed", artifact.provenance.seed},
                         {"data_fingerprint", artifact.provenance.data_fingerprint},
                         {"tool_version", artifact.provenance.tool_version}};

    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io_error", "cannot write file: " + path.string());
    out << doc.dump(2) << "\n";
    require(out.good(), "io_error", "write failed: " + path.string());
}

ModelArtifact load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io_error", "cannot open file: " + path.string());

    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        fail("model_format", "malformed model file " + path.string() + ": " + e.what());
    }

    try {
        const int version = doc.at("format_version").get<int>();
        if (version > kModelFormatVersion) {
            fail("model_format", "model format_version " + std::to_string(version) +
                                     " is newer than supported " +
                                     std::to_string(kModelFormatVersion));
        }

        ModelArtifact artifact;
        GenerativeClassifier& clf = artifact.classifier;
        const json& cj = doc.at("classifier");
        for (const json& name : cj.at("classes")) {
            clf.classes.push_back(label_from_name(name.get<std::string>()));
        }
        clf.priors = vector_from(cj.at("priors"));
        for (const json& mj : cj.at("models")) clf.models.push_back(mixture_from_json(mj));
        for (const json& col : cj.at("raw_schema")) {
            clf.raw_schema.push_back(
                {col.at("name").get<std::string>(), col.at("unit").get<std::string>()});
        }
        clf.training_medians = vector_from(cj.at("training_medians"));
        const json& threshold = cj.at("reject_threshold");
        if (!threshold.is_null()) clf.reject_threshold = threshold.get<double>();
        clf.pipeline = pipeline_from_json(doc.at("pipeline"));

        require(clf.classes.size() == clf.models.size() &&
                    clf.priors.size() == static_cast<Eigen::Index>(clf.classes.size()),
                "model_format", "class/model/prior count mismatch");

        const json& prov = doc.at("provenance");
        artifact.provenance.seed = prov.at("seed").get<std::uint64_t>();
        artifact.provenance.data_fingerprint = prov.at("data_fingerprint").get<std::string>();
        artifact.provenance.tool_version = prov.at("tool_version").get<std::string>();
        return artifact;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail("model_format", "invalid model file " + path.string() + ": " + e.what());
    }
}

std::string fingerprint_bytes(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + buf;
}

std::string fingerprint_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io_error", "cannot open file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return fingerprint_bytes(buffer.str());
}

} // namespace amgmm
