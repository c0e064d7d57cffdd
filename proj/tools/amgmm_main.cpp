// amgmm: per-class Gaussian mixture training, Bayes-rule defect
// classification with a reject option, decision-boundary export, and seeded
// synthetic process data for additive-manufacturing parameter tables.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amgmm/classifier.hpp"
#include "amgmm/dataset.hpp"
#include "amgmm/error.hpp"
#include "amgmm/model_io.hpp"
#include "amgmm/numeric.hpp"
#include "amgmm/synth.hpp"

namespace {

using namespace amgmm;

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    parts.push_back(current);
    return parts;
}

LabelMapping parse_label_map(const std::string& text) {
    LabelMapping mapping = default_label_mapping();
    if (text.empty()) return mapping;
    for (const std::string& pair : split_list(text, ',')) {
        const auto eq = pair.find('=');
        require(eq != std::string::npos && eq > 0 && eq + 1 < pair.size(), "invalid_parameter",
                "label map entries must look like raw=no_defect: '" + pair + "'");
        const std::string raw = pair.substr(0, eq);
        const std::string target = pair.substr(eq + 1);
        Label label = Label::unlabeled;
        if (target == "no_defect") label = Label::no_defect;
        else if (target == "defect") label = Label::defect;
        else if (target == "inconclusive") label = Label::inconclusive;
        else fail("invalid_parameter", "unknown label target '" + target + "'");
        mapping[raw] = label;
    }
    return mapping;
}

std::optional<EnergyFeatureConfig> parse_energy(const std::string& text) {
    if (text.empty()) return std::nullopt;
    const std::vector<std::string> parts = split_list(text, ',');
    require(parts.size() == 3, "invalid_parameter",
            "--energy expects POWER_COL,SPEED_COL,CP (CP is a number or a column name)");
    EnergyFeatureConfig config;
    config.power_column = parts[0];
    config.speed_column = parts[1];
    try {
        config.specific_heat = parse_double(parts[2]);
    } catch (const Error&) {
        config.specific_heat = parts[2];
    }
    return config;
}

// Loads prediction/evaluation data and aligns it to the model schema.
// Columns are matched by name in any order; columns the model does not know
// ride along silently unless required ones are missing, in which case both
// lists appear in the error to make renames easy to spot.
Dataset load_for_model(const std::filesystem::path& path, const GenerativeClassifier& clf,
                       const std::string& label_column, const LabelMapping& mapping) {
    Dataset data = load_csv(path, {}, label_column, mapping, false);

    std::vector<std::string> expected;
    for (const auto& c : clf.raw_schema) expected.push_back(c.name);
    std::string missing, extra;
    for (const auto& name : expected) {
        if (data.column_index(name) < 0) missing += (missing.empty() ? "" : ", ") + name;
    }
    for (const auto& col : data.schema) {
        bool known = false;
        for (const auto& name : expected) {
            if (col.name == name) known = true;
        }
        if (!known) extra += (extra.empty() ? "" : ", ") + col.name;
    }
    if (!missing.empty()) {
        fail("schema_mismatch",
             "model/data schema mismatch; missing: [" + missing + "], extra: [" + extra + "]");
    }

    Dataset aligned;
    aligned.schema = clf.raw_schema;
    aligned.labels = data.labels;
    aligned.provenance = data.provenance;
    aligned.rows.resize(data.n(), static_cast<Eigen::Index>(expected.size()));
    for (std::size_t j = 0; j < expected.size(); ++j) {
        aligned.rows.col(static_cast<Eigen::Index>(j)) = data.rows.col(data.column_index(expected[j]));
    }
    return aligned;
}

// Restricts a dataset to the named feature columns, preserving the given
// order.
Dataset select_features(const Dataset& data, const std::vector<std::string>& features) {
    Dataset out;
    out.labels = data.labels;
    out.provenance = data.provenance;
    out.rows.resize(data.n(), static_cast<Eigen::Index>(features.size()));
    for (std::size_t j = 0; j < features.size(); ++j) {
        const Eigen::Index idx = data.column_index(features[j]);
        require(idx >= 0, "schema_mismatch",
                "feature column '" + features[j] + "' not found in the data");
        out.schema.push_back(data.schema[static_cast<std::size_t>(idx)]);
        out.rows.col(static_cast<Eigen::Index>(j)) = data.rows.col(idx);
    }
    require(!out.schema.empty(), "schema_mismatch", "feature selection left no columns");
    return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io_error", "cannot write file: " + path.string());
    return out;
}

void print_label_counts(const Dataset& data, std::ostream& os) {
    std::size_t counts[4] = {0, 0, 0, 0};
    for (Label l : data.labels) ++counts[static_cast<std::size_t>(l)];
    if (!data.has_labels()) {
        os << "labels: none\n";
        return;
    }
    os << "labels:";
    for (Label l : {Label::no_defect, Label::defect, Label::inconclusive, Label::unlabeled}) {
        const std::size_t c = counts[static_cast<std::size_t>(l)];
        if (c > 0) os << " " << label_name(l) << "=" << c;
    }
    os << "\n";
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string data, schema = "lpbf", label_col = "label", components = "auto";
    std::string covariance = "full", energy, priors = "empirical", label_map, features, out;
    bool standardize = true;
    std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& args) {
    Dataset dataset = load_csv(args.data, schema_preset(schema_preset_from_name(args.schema)),
                               args.label_col, parse_label_map(args.label_map), true);
    if (!args.features.empty()) {
        dataset = select_features(dataset, split_list(args.features, ','));
    }

    TrainConfig config;
    if (args.components != "auto") {
        int m = 0;
        try {
            m = static_cast<int>(parse_double(args.components));
        } catch (const Error&) {
            fail("invalid_parameter", "--components expects an integer or 'auto'");
        }
        config.components = m;
    }
    config.covariance_kind = covariance_kind_from_name(args.covariance);
    config.uniform_priors = (args.priors == "uniform");
    require(args.priors == "uniform" || args.priors == "empirical", "invalid_parameter",
            "--priors must be empirical or uniform");
    config.seed = args.seed;
    config.energy = parse_energy(args.energy);
    config.standardize = args.standardize;

    const GenerativeClassifier clf = train_classifier(dataset, config);

    ModelArtifact artifact;
    artifact.classifier = clf;
    artifact.provenance.seed = args.seed;
    artifact.provenance.data_fingerprint = fingerprint_file(args.data);
    save_model(artifact, args.out);

    for (std::size_t c = 0; c < clf.classes.size(); ++c) {
        const FitReport& fit = clf.models[c].fit_info;
        std::cout << "class " << label_name(clf.classes[c])
                  << ": components=" << clf.models[c].num_components()
                  << " avg_loglik=" << format_double(fit.final_avg_loglik)
                  << " iterations=" << fit.n_iterations
                  << " converged=" << (fit.converged ? "true" : "false") << "\n";
    }
    std::cout << "priors:";
    for (std::size_t c = 0; c < clf.classes.size(); ++c) {
        std::cout << " " << label_name(clf.classes[c]) << "="
                  << format_double(clf.priors[static_cast<Eigen::Index>(c)]);
    }
    std::cout << "\n";
    std::cout << "pipeline: features=" << clf.pipeline.dim()
              << " standardize=" << (clf.pipeline.standardize ? "true" : "false")
              << " dropped=" << clf.pipeline.dropped_columns.size() << "\n";
    std::cout << "model: " << args.out << " (" << artifact.provenance.data_fingerprint << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
    std::string model, data, out, label_col = "label", label_map;
    double reject_threshold = -1.0; // < 0 means unset
};

int cmd_predict(const PredictArgs& args) {
    ModelArtifact artifact = load_model(args.model);
    GenerativeClassifier& clf = artifact.classifier;
    if (args.reject_threshold >= 0.0) clf.reject_threshold = args.reject_threshold;

    const Dataset data = load_for_model(args.data, clf, args.label_col,
                                        parse_label_map(args.label_map));

    std::ofstream out = open_output(args.out);
    out << "row";
    for (Label l : clf.classes) out << ",posterior_" << label_name(l);
    out << ",predicted\n";

    std::size_t rejected = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const PosteriorVector post = posterior(data.rows.row(i).transpose(), clf);
        const Label decided = decide_from_posterior(post, clf);
        if (decided == Label::inconclusive) ++rejected;
        out << i;
        for (Eigen::Index c = 0; c < post.values.size(); ++c) {
            out << "," << format_double(post.values[c]);
        }
        out << "," << label_name(decided) << "\n";
    }
    require(out.good(), "io_error", "write failed: " + args.out);

    std::cout << "rows: " << data.n() << "\n";
    std::cout << "rejected: " << rejected << "\n";
    std::cout << "predictions: " << args.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string model, data, out, label_col = "label", label_map;
    double reject_threshold = -1.0;
};

void render_metrics(const MetricsReport& report, std::ostream& os, const std::string& sep) {
    const auto value_or_na = [](double v) {
        return std::isnan(v) ? std::string("n/a") : format_double(v);
    };
    os << "rows" << sep << report.n_rows << "\n";
    os << "scored" << sep << report.n_scored << "\n";
    os << "rejected" << sep << report.n_rejected << "\n";
    os << "inconclusive_labels" << sep << report.n_inconclusive_labels << "\n";
    os << "unlabeled" << sep << report.n_unlabeled << "\n";
    os << "accuracy" << sep << (report.accuracy_defined ? format_double(report.accuracy) : "n/a")
       << "\n";
    os << "mean_true_class_nll" << sep << value_or_na(report.mean_true_class_nll) << "\n";
    for (std::size_t c = 0; c < report.classes.size(); ++c) {
        os << "precision_" << label_name(report.classes[c]) << sep
           << value_or_na(report.precision[c]) << "\n";
        os << "recall_" << label_name(report.classes[c]) << sep << value_or_na(report.recall[c])
           << "\n";
    }
    for (std::size_t r = 0; r < report.classes.size(); ++r) {
        for (std::size_t c = 0; c < report.classes.size(); ++c) {
            os << "confusion_" << label_name(report.classes[r]) << "_"
               << label_name(report.classes[c]) << sep << report.confusion[r][c] << "\n";
        }
    }
}

int cmd_evaluate(const EvaluateArgs& args) {
    ModelArtifact artifact = load_model(args.model);
    GenerativeClassifier& clf = artifact.classifier;
    if (args.reject_threshold >= 0.0) clf.reject_threshold = args.reject_threshold;

    const Dataset data = load_for_model(args.data, clf, args.label_col,
                                        parse_label_map(args.label_map));
    const MetricsReport report = evaluate(clf, data);

    render_metrics(report, std::cout, ": ");
    if (!args.out.empty()) {
        std::ofstream out = open_output(args.out);
        out << "metric,value\n";
        render_metrics(report, out, ",");
        require(out.good(), "io_error", "write failed: " + args.out);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// boundary

struct BoundaryArgs {
    std::string model, x, y, fill = "median", out;
    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
    int resolution = 0;
};

int cmd_boundary(const BoundaryArgs& args) {
    const ModelArtifact artifact = load_model(args.model);
    const GenerativeClassifier& clf = artifact.classifier;

    std::map<std::string, double> overrides;
    if (args.fill != "median") {
        for (const std::string& pair : split_list(args.fill, ',')) {
            const auto eq = pair.find('=');
            require(eq != std::string::npos && eq > 0 && eq + 1 < pair.size(),
                    "invalid_parameter", "--fill expects median or COL=VALUE,...: '" + pair + "'");
            overrides[pair.substr(0, eq)] = parse_double(pair.substr(eq + 1));
        }
    }

    const BoundaryGrid grid = decision_boundary_grid(
        clf, args.x, args.y, {args.xmin, args.xmax, args.ymin, args.ymax}, args.resolution,
        overrides);

    std::ofstream out = open_output(args.out);
    out << "# fill:";
    for (std::size_t i = 0; i < grid.fill_used.size(); ++i) {
        out << (i ? "," : " ") << grid.fill_used[i].first << "="
            << format_double(grid.fill_used[i].second);
    }
    out << "\n";
    out << grid.x_column << "," << grid.y_column;
    for (Label l : grid.classes) out << ",posterior_" << label_name(l);
    out << ",predicted\n";
    for (const auto& cell : grid.cells) {
        out << format_double(cell.x) << "," << format_double(cell.y);
        for (Eigen::Index c = 0; c < cell.posterior.size(); ++c) {
            out << "," << format_double(cell.posterior[c]);
        }
        out << "," << label_name(cell.predicted) << "\n";
    }
    require(out.good(), "io_error", "write failed: " + args.out);

    std::cout << "cells: " << grid.cells.size() << "\n";
    std::cout << "grid: " << args.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string shape, scenario, out;
    long long n = 0;
    long long d = 1;
    std::uint64_t seed = 0;
    double overlap = 0.5, mean = 0.0, scale = 1.0, separation = 4.0, shape_exponent = 4.0,
           dof = 3.0;
};

int cmd_synth(const SynthArgs& args) {
    require(args.shape.empty() != args.scenario.empty(), "invalid_parameter",
            "exactly one of --shape or --scenario is required");
    Dataset dataset;
    if (!args.shape.empty()) {
        ShapeParams params;
        params.mean = args.mean;
        params.scale = args.scale;
        params.separation = args.separation;
        params.shape_exponent = args.shape_exponent;
        params.dof = args.dof;
        dataset = synth_generate(synth_shape_from_name(args.shape), args.n, args.d, args.seed,
                                 params);
    } else {
        dataset = synth_classification(synth_scenario_from_name(args.scenario), args.n, args.seed,
                                       args.overlap);
    }
    save_csv(dataset, args.out);
    std::cout << "rows: " << dataset.n() << "\n";
    print_label_counts(dataset, std::cout);
    std::cout << "dataset: " << args.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// split

struct SplitArgs {
    std::string data, schema = "custom", label_col = "label", label_map, out_train, out_test;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    bool stratified = true;
};

int cmd_split(const SplitArgs& args) {
    const Dataset dataset =
        load_csv(args.data, schema_preset(schema_preset_from_name(args.schema)), args.label_col,
                 parse_label_map(args.label_map), false);
    const SplitResult result = split(dataset, args.test_fraction, args.seed, args.stratified);
    save_csv(result.train, args.out_train);
    save_csv(result.test, args.out_test);
    std::cout << "train rows: " << result.train.n() << "\n";
    print_label_counts(result.train, std::cout);
    std::cout << "test rows: " << result.test.n() << "\n";
    print_label_counts(result.test, std::cout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian mixture defect classifier for additive-manufacturing process data"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Fit per-class mixtures and write a model file");
    train->add_option("--data", train_args.data, "Training CSV")->required();
    train->add_option("--schema", train_args.schema, "Column schema: lpbf, ded or custom");
    train->add_option("--label-col", train_args.label_col, "Label column name");
    train->add_option("--components", train_args.components, "Components per class, or 'auto'");
    train->add_option("--covariance", train_args.covariance, "Covariance kind: full or diag");
    train->add_option("--energy", train_args.energy,
                      "Energy surrogate: POWER_COL,SPEED_COL,CP (number or column)");
    train->add_option("--standardize", train_args.standardize, "Z-score features (default true)");
    train->add_option("--priors", train_args.priors, "Class priors: empirical or uniform");
    train->add_option("--label-map", train_args.label_map,
                      "Extra label mappings RAW=no_defect,...");
    train->add_option("--features", train_args.features,
                      "Feature subset COL1,COL2,... (default: all schema columns)");
    train->add_option("--seed", train_args.seed, "Master seed");
    train->add_option("--out", train_args.out, "Output model path")->required();

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "Posteriors and decisions for a dataset");
    predict->add_option("--model", predict_args.model, "Model file")->required();
    predict->add_option("--data", predict_args.data, "Input CSV")->required();
    predict->add_option("--out", predict_args.out, "Output CSV")->required();
    predict->add_option("--label-col", predict_args.label_col,
                        "Label column to exclude from features");
    predict->add_option("--label-map", predict_args.label_map, "Extra label mappings");
    predict->add_option("--reject-threshold", predict_args.reject_threshold,
                        "Abstain when the top posterior is below this");

    EvaluateArgs evaluate_args;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Metrics against labeled data");
    evaluate_cmd->add_option("--model", evaluate_args.model, "Model file")->required();
    evaluate_cmd->add_option("--data", evaluate_args.data, "Labeled CSV")->required();
    evaluate_cmd->add_option("--label-col", evaluate_args.label_col, "Label column name");
    evaluate_cmd->add_option("--label-map", evaluate_args.label_map, "Extra label mappings");
    evaluate_cmd->add_option("--out", evaluate_args.out, "Optional metrics CSV");
    evaluate_cmd->add_option("--reject-threshold", evaluate_args.reject_threshold,
                             "Abstain when the top posterior is below this");

    BoundaryArgs boundary_args;
    auto* boundary = app.add_subcommand("boundary", "Posterior grid over two raw columns");
    boundary->add_option("--model", boundary_args.model, "Model file")->required();
    boundary->add_option("--x", boundary_args.x, "X axis column")->required();
    boundary->add_option("--y", boundary_args.y, "Y axis column")->required();
    boundary->add_option("--xmin", boundary_args.xmin, "X lower bound")->required();
    boundary->add_option("--xmax", boundary_args.xmax, "X upper bound")->required();
    boundary->add_option("--ymin", boundary_args.ymin, "Y lower bound")->required();
    boundary->add_option("--ymax", boundary_args.ymax, "Y upper bound")->required();
    boundary->add_option("--resolution", boundary_args.resolution, "Cells per axis")->required();
    boundary->add_option("--fill", boundary_args.fill,
                         "Values for the other columns: median or COL=VALUE,...");
    boundary->add_option("--out", boundary_args.out, "Output CSV")->required();

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Seeded synthetic datasets");
    synth->add_option("--shape", synth_args.shape,
                      "unimodal, bimodal, flattened or heavy_tailed");
    synth->add_option("--scenario", synth_args.scenario, "lpbf_like or ded_like");
    synth->add_option("--n", synth_args.n, "Row count")->required();
    synth->add_option("--d", synth_args.d, "Dimensions (shape mode)");
    synth->add_option("--seed", synth_args.seed, "Master seed");
    synth->add_option("--overlap", synth_args.overlap,
                      "Class overlap in [0,1]; 0 separates maximally (scenario mode)");
    synth->add_option("--mean", synth_args.mean, "Location (shape mode)");
    synth->add_option("--scale", synth_args.scale, "Scale (shape mode)");
    synth->add_option("--separation", synth_args.separation,
                      "Bimodal center distance in std units");
    synth->add_option("--shape-exponent", synth_args.shape_exponent,
                      "Flattened-bell exponent (> 2)");
    synth->add_option("--dof", synth_args.dof, "Heavy-tail degrees of freedom");
    synth->add_option("--out", synth_args.out, "Output CSV")->required();

    SplitArgs split_args;
    auto* split_cmd = app.add_subcommand("split", "Seeded train/test split");
    split_cmd->add_option("--data", split_args.data, "Input CSV")->required();
    split_cmd->add_option("--schema", split_args.schema, "Column schema: lpbf, ded or custom");
    split_cmd->add_option("--label-col", split_args.label_col, "Label column name");
    split_cmd->add_option("--label-map", split_args.label_map, "Extra label mappings");
    split_cmd->add_option("--test-fraction", split_args.test_fraction, "Test fraction in (0,1)")
        ->required();
    split_cmd->add_option("--seed", split_args.seed, "Master seed");
    split_cmd->add_option("--stratified", split_args.stratified,
                          "Stratify by label (default true)");
    split_cmd->add_option("--out-train", split_args.out_train, "Training CSV")->required();
    split_cmd->add_option("--out-test", split_args.out_test, "Test CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(train_args);
        if (predict->parsed()) return cmd_predict(predict_args);
        if (evaluate_cmd->parsed()) return cmd_evaluate(evaluate_args);
        if (boundary->parsed()) return cmd_boundary(boundary_args);
        if (synth->parsed()) return cmd_synth(synth_args);
        if (split_cmd->parsed()) return cmd_split(split_args);
    } catch (const Error& e) {
        std::cerr << "error[" << e.code() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
