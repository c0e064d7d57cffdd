#include "amgmm/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "amgmm/error.hpp"
#include "amgmm/numeric.hpp"
#include "amgmm/rng.hpp"

namespace amgmm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool usable_label(Label label) {
    return label == Label::no_defect || label == Label::defect;
}

// Enough rows to estimate M components in d dimensions: the d+2 class
// floor, and d+1 rows of mass per component.
Eigen::Index min_rows_for(int components, Eigen::Index d) {
    return std::max<Eigen::Index>(d + 2, static_cast<Eigen::Index>(components) * (d + 1));
}

void check_schema(const GenerativeClassifier& clf, const Dataset& dataset) {
    std::vector<std::string> expected;
    for (const auto& c : clf.raw_schema) expected.push_back(c.name);
    std::vector<std::string> got = dataset.column_names();
    if (expected == got) return;

    std::set<std::string> exp_set(expected.begin(), expected.end());
    std::set<std::string> got_set(got.begin(), got.end());
    std::string missing, extra;
    for (const auto& name : expected) {
        if (!got_set.count(name)) missing += (missing.empty() ? "" : ", ") + name;
    }
    for (const auto& name : got) {
        if (!exp_set.count(name)) extra += (extra.empty() ? "" : ", ") + name;
    }
    if (missing.empty() && extra.empty()) {
        fail("schema_mismatch", "columns are ordered differently from the model schema");
    }
    fail("schema_mismatch", "model/data schema mismatch; missing: [" + missing + "], extra: [" +
                                extra + "]");
}

Eigen::VectorXd log_joints_for(const Eigen::VectorXd& transformed,
                               const GenerativeClassifier& clf) {
    const Eigen::Index k = clf.num_classes();
    Eigen::VectorXd joints(k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const double prior = clf.priors[c];
        joints[c] = prior > 0.0
                        ? mixture_logdensity(transformed, clf.models[static_cast<std::size_t>(c)]) +
                              std::log(prior)
                        : -std::numeric_limits<double>::infinity();
    }
    return joints;
}

} // namespace

Eigen::Index GenerativeClassifier::class_index(Label label) const {
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] == label) return static_cast<Eigen::Index>(i);
    }
    return -1;
}

PosteriorVector posterior_from_log_joints(const Eigen::VectorXd& log_joints) {
    require(log_joints.size() >= 1, "invalid_parameter", "no classes");
    std::vector<double> joints(log_joints.data(), log_joints.data() + log_joints.size());
    const double evidence = log_sum_exp(joints);
    PosteriorVector post;
    post.log_evidence = evidence;
    post.values.resize(log_joints.size());
    for (Eigen::Index i = 0; i < log_joints.size(); ++i) {
        post.values[i] = std::exp(log_joints[i] - evidence);
    }
    post.values /= post.values.sum();
    return post;
}

GenerativeClassifier train_classifier(const Dataset& dataset, const TrainConfig& config) {
    std::vector<Eigen::Index> usable;
    for (Eigen::Index i = 0; i < dataset.n(); ++i) {
        if (usable_label(dataset.labels[static_cast<std::size_t>(i)])) usable.push_back(i);
    }
    require(!usable.empty(), "insufficient_class_data", "no usable labeled rows");

    // Class order is fixed (no_defect before defect) so tie-breaking and
    // output columns are deterministic.
    std::vector<Label> classes;
    for (Label candidate : {Label::no_defect, Label::defect}) {
        for (Eigen::Index i : usable) {
            if (dataset.labels[static_cast<std::size_t>(i)] == candidate) {
                classes.push_back(candidate);
                break;
            }
        }
    }
    require(classes.size() >= 2, "insufficient_class_data",
            "training requires at least 2 distinct usable classes");

    Eigen::MatrixXd usable_rows(static_cast<Eigen::Index>(usable.size()), dataset.dim());
    for (std::size_t i = 0; i < usable.size(); ++i) {
        usable_rows.row(static_cast<Eigen::Index>(i)) = dataset.rows.row(usable[i]);
    }

    GenerativeClassifier clf;
    clf.classes = classes;
    clf.raw_schema = dataset.schema;
    clf.reject_threshold = config.reject_threshold;
    clf.pipeline =
        fit_pipeline(usable_rows, dataset.column_names(), {config.energy, config.standardize});

    clf.training_medians.resize(dataset.dim());
    for (Eigen::Index j = 0; j < dataset.dim(); ++j) {
        std::vector<double> column(usable_rows.col(j).data(),
                                   usable_rows.col(j).data() + usable_rows.rows());
        clf.training_medians[j] = median(std::move(column));
    }

    const Eigen::MatrixXd transformed = clf.pipeline.transform_matrix(usable_rows);
    const Eigen::Index d = transformed.cols();

    clf.priors.resize(static_cast<Eigen::Index>(classes.size()));
    for (std::size_t c = 0; c < classes.size(); ++c) {
        std::vector<Eigen::Index> members;
        for (std::size_t i = 0; i < usable.size(); ++i) {
            if (dataset.labels[static_cast<std::size_t>(usable[i])] == classes[c]) {
                members.push_back(static_cast<Eigen::Index>(i));
            }
        }
        const Eigen::Index n_c = static_cast<Eigen::Index>(members.size());
        require(n_c >= d + 2, "insufficient_class_data",
                std::string("class '") + label_name(classes[c]) + "' has " + std::to_string(n_c) +
                    " rows; need at least " + std::to_string(d + 2));

        Eigen::MatrixXd class_rows(n_c, d);
        for (Eigen::Index i = 0; i < n_c; ++i) {
            class_rows.row(i) = transformed.row(members[static_cast<std::size_t>(i)]);
        }

        EmConfig em;
        em.seed = Rng::derive_seed(config.seed, "class-fit", c);
        em.max_iter = config.max_iter;
        em.rel_tol = config.rel_tol;
        em.ridge = config.ridge;
        em.covariance_kind = config.covariance_kind;
        em.n_restarts = config.n_restarts;

        if (config.components.has_value()) {
            const int m = *config.components;
            require(m >= 1, "invalid_parameter", "component count must be >= 1");
            require(n_c >= min_rows_for(m, d), "insufficient_class_data",
                    std::string("class '") + label_name(classes[c]) + "' has " +
                        std::to_string(n_c) + " rows; " + std::to_string(m) +
                        " components need at least " + std::to_string(min_rows_for(m, d)));
            clf.models.push_back(fit_em(class_rows, m, em));
        } else {
            std::vector<int> candidates;
            for (int m : config.component_candidates) {
                if (n_c >= min_rows_for(m, d)) candidates.push_back(m);
            }
            require(!candidates.empty(), "insufficient_class_data",
                    std::string("class '") + label_name(classes[c]) +
                        "' is too small for any candidate component count");
            clf.models.push_back(select_components(class_rows, candidates, em).best_model);
        }
        clf.priors[static_cast<Eigen::Index>(c)] =
            static_cast<double>(n_c) / static_cast<double>(usable.size());
    }

    if (config.uniform_priors) {
        clf.priors.setConstant(1.0 / static_cast<double>(classes.size()));
    }
    clf.priors /= clf.priors.sum();
    return clf;
}

PosteriorVector posterior(const Eigen::VectorXd& raw_row, const GenerativeClassifier& clf) {
    require(clf.num_classes() >= 2, "invalid_parameter", "classifier has fewer than 2 classes");
    if (raw_row.size() != static_cast<Eigen::Index>(clf.raw_schema.size())) {
        fail("dimension_mismatch",
             "expected raw dimension " + std::to_string(clf.raw_schema.size()) + ", received " +
                 std::to_string(raw_row.size()));
    }
    const TransformedRow transformed = clf.pipeline.transform(raw_row);
    return posterior_from_log_joints(log_joints_for(transformed.values, clf));
}

Label decide_from_posterior(const PosteriorVector& post, const GenerativeClassifier& clf) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < post.values.size(); ++c) {
        if (post.values[c] > post.values[best]) best = c;
    }
    if (clf.reject_threshold.has_value() && post.values[best] < *clf.reject_threshold) {
        return Label::inconclusive;
    }
    return clf.classes[static_cast<std::size_t>(best)];
}

Label classify(const Eigen::VectorXd& raw_row, const GenerativeClassifier& clf) {
    return decide_from_posterior(posterior(raw_row, clf), clf);
}

MetricsReport evaluate(const GenerativeClassifier& clf, const Dataset& dataset) {
    require(dataset.n() >= 1, "empty_evaluation", "evaluation set is empty");
    check_schema(clf, dataset);

    const std::size_t k = clf.classes.size();
    MetricsReport report;
    report.classes = clf.classes;
    report.n_rows = static_cast<std::size_t>(dataset.n());
    report.confusion.assign(k, std::vector<std::size_t>(k, 0));

    double nll_sum = 0.0;
    std::size_t nll_count = 0;
    std::size_t correct = 0;
    bool any_usable = false;

    for (Eigen::Index i = 0; i < dataset.n(); ++i) {
        const Label truth = dataset.labels[static_cast<std::size_t>(i)];
        if (truth == Label::unlabeled) {
            ++report.n_unlabeled;
            continue;
        }
        if (truth == Label::inconclusive) {
            ++report.n_inconclusive_labels;
            continue;
        }
        any_usable = true;
        const PosteriorVector post = posterior(dataset.rows.row(i).transpose(), clf);
        const Eigen::Index truth_idx = clf.class_index(truth);
        require(truth_idx >= 0, "unknown_label",
                std::string("label '") + label_name(truth) + "' is not a classifier class");
        nll_sum += -std::log(std::max(post.values[truth_idx], 1e-300));
        ++nll_count;

        const Label decided = decide_from_posterior(post, clf);
        if (decided == Label::inconclusive) {
            ++report.n_rejected;
            continue;
        }
        const Eigen::Index pred_idx = clf.class_index(decided);
        ++report.n_scored;
        ++report.confusion[static_cast<std::size_t>(truth_idx)][static_cast<std::size_t>(pred_idx)];
        if (pred_idx == truth_idx) ++correct;
    }

    require(any_usable, "unlabeled_data", "no rows with usable labels to evaluate");

    report.accuracy_defined = report.n_scored > 0;
    report.accuracy = report.accuracy_defined
                          ? static_cast<double>(correct) / static_cast<double>(report.n_scored)
                          : kNaN;
    report.mean_true_class_nll =
        nll_count > 0 ? nll_sum / static_cast<double>(nll_count) : kNaN;

    report.precision.assign(k, kNaN);
    report.recall.assign(k, kNaN);
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t pred_total = 0, true_total = 0;
        for (std::size_t r = 0; r < k; ++r) {
            pred_total += report.confusion[r][c];
            true_total += report.confusion[c][r];
        }
        if (pred_total > 0) {
            report.precision[c] =
                static_cast<double>(report.confusion[c][c]) / static_cast<double>(pred_total);
        }
        if (true_total > 0) {
            report.recall[c] =
                static_cast<double>(report.confusion[c][c]) / static_cast<double>(true_total);
        }
    }
    return report;
}

BoundaryGrid decision_boundary_grid(const GenerativeClassifier& clf, const std::string& x_column,
                                    const std::string& y_column, const GridBounds& bounds,
                                    int resolution,
                                    const std::map<std::string, double>& fill_overrides) {
    require(resolution >= 1, "invalid_parameter", "resolution must be positive");
    require(x_column != y_column, "invalid_parameter", "axis columns must be distinct");
    require(bounds.xmax >= bounds.xmin && bounds.ymax >= bounds.ymin, "invalid_parameter",
            "grid bounds are inverted");

    std::vector<std::string> names;
    for (const auto& c : clf.raw_schema) names.push_back(c.name);
    const auto index_of = [&](const std::string& name) -> Eigen::Index {
        for (std::size_t j = 0; j < names.size(); ++j) {
            if (names[j] == name) return static_cast<Eigen::Index>(j);
        }
        fail("schema_mismatch", "unknown column '" + name + "'");
    };
    const Eigen::Index xi = index_of(x_column);
    const Eigen::Index yi = index_of(y_column);
    for (const auto& [name, value] : fill_overrides) {
        (void)value;
        index_of(name);
    }

    BoundaryGrid grid;
    grid.x_column = x_column;
    grid.y_column = y_column;
    grid.classes = clf.classes;

    Eigen::VectorXd base = clf.training_medians;
    for (Eigen::Index j = 0; j < base.size(); ++j) {
        auto it = fill_overrides.find(names[static_cast<std::size_t>(j)]);
        if (it != fill_overrides.end()) base[j] = it->second;
        if (j != xi && j != yi) {
            grid.fill_used.emplace_back(names[static_cast<std::size_t>(j)], base[j]);
        }
    }

    const auto coord = [resolution](double lo, double hi, int i) {
        if (resolution == 1) return 0.5 * (lo + hi);
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(resolution - 1);
    };

    grid.cells.reserve(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution));
    Eigen::VectorXd probe = base;
    for (int row = 0; row < resolution; ++row) {
        probe[yi] = coord(bounds.ymin, bounds.ymax, row);
        for (int col = 0; col < resolution; ++col) {
            probe[xi] = coord(bounds.xmin, bounds.xmax, col);
            BoundaryGrid::Cell cell;
            cell.x = probe[xi];
            cell.y = probe[yi];
            PosteriorVector post = posterior(probe, clf);
            cell.predicted = decide_from_posterior(post, clf);
            cell.posterior = std::move(post.values);
            grid.cells.push_back(std::move(cell));
        }
    }
    return grid;
}

} // namespace amgmm
