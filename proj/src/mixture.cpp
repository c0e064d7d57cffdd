#include "amgmm/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "amgmm/error.hpp"
#include "amgmm/numeric.hpp"
#include "amgmm/rng.hpp"

namespace amgmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_data(const Eigen::MatrixXd& data) {
    require(data.rows() >= 1, "insufficient_data", "data must contain at least one row");
    require(data.allFinite(), "invalid_parameter", "data contains non-finite values");
}

void check_config(const EmConfig& config) {
    require(config.max_iter >= 1, "invalid_parameter", "max_iter must be >= 1");
    require(config.rel_tol >= 0.0, "invalid_parameter", "rel_tol must be >= 0");
    require(config.ridge >= 0.0, "invalid_parameter", "ridge must be >= 0");
    require(config.n_restarts >= 1, "invalid_parameter", "n_restarts must be >= 1");
}

Eigen::MatrixXd apply_kind(Eigen::MatrixXd scatter, CovarianceKind kind) {
    if (kind == CovarianceKind::diagonal) {
        Eigen::VectorXd diag = scatter.diagonal();
        scatter.setZero();
        scatter.diagonal() = diag;
    }
    return scatter;
}

// Per-row log joint: log weight_m + log N(x_i; component m).
void log_joint_row(const Eigen::VectorXd& x, const MixtureModel& model,
                   std::vector<double>& out) {
    const int m = model.num_components();
    out.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        const double w = model.weights[j];
        out[static_cast<std::size_t>(j)] =
            (w > 0.0) ? std::log(w) + gaussian_logpdf(x, model.components[static_cast<std::size_t>(j)])
                      : kNegInf;
    }
}

struct EmRun {
    MixtureModel model;
    bool ok = false;
    std::string error_code;
    std::string error_message;
};

MixtureModel assemble(Eigen::VectorXd weights, std::vector<Eigen::VectorXd> means,
                      std::vector<Eigen::MatrixXd> covariances, CovarianceKind kind) {
    MixtureModel model;
    model.covariance_kind = kind;
    weights /= weights.sum();
    model.weights = std::move(weights);
    model.components.reserve(means.size());
    for (std::size_t j = 0; j < means.size(); ++j) {
        model.components.push_back(make_gaussian(std::move(means[j]), std::move(covariances[j]),
                                                 "component " + std::to_string(j)));
    }
    return model;
}

EmRun run_em_once(const Eigen::MatrixXd& data, int num_components, const EmConfig& config,
                  int restart_index) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();

    EmRun run;
    try {
        const std::uint64_t init_seed =
            Rng::derive_seed(config.seed, "init", static_cast<std::uint64_t>(restart_index));
        KmeansInit init = kmeanspp_init(data, num_components, init_seed);

        double max_ridge = 0.0;

        // Initial parameters from the k-means clustering.
        Eigen::VectorXd weights = Eigen::VectorXd::Zero(num_components);
        std::vector<Eigen::VectorXd> means(static_cast<std::size_t>(num_components));
        std::vector<Eigen::MatrixXd> covs(static_cast<std::size_t>(num_components));
        for (int j = 0; j < num_components; ++j) {
            std::vector<Eigen::Index> members;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (init.assignments[static_cast<std::size_t>(i)] == j) members.push_back(i);
            }
            weights[j] = static_cast<double>(members.size()) / static_cast<double>(n);
            means[static_cast<std::size_t>(j)] = init.means[static_cast<std::size_t>(j)];
            Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
            for (Eigen::Index i : members) {
                const Eigen::VectorXd c = data.row(i).transpose() - means[static_cast<std::size_t>(j)];
                scatter.noalias() += c * c.transpose();
            }
            if (!members.empty()) scatter /= static_cast<double>(members.size());
            auto reg = regularize_covariance(apply_kind(std::move(scatter), config.covariance_kind),
                                             config.ridge, "component " + std::to_string(j));
            max_ridge = std::max(max_ridge, reg.ridge_used);
            covs[static_cast<std::size_t>(j)] = std::move(reg.matrix);
        }

        MixtureModel model = assemble(std::move(weights), std::move(means), std::move(covs),
                                      config.covariance_kind);

        // Global scatter, used when a collapsed component is re-seeded.
        Eigen::MatrixXd global_scatter;
        {
            const Eigen::RowVectorXd mu = data.colwise().mean();
            const Eigen::MatrixXd centered = data.rowwise() - mu;
            global_scatter = apply_kind(centered.transpose() * centered / static_cast<double>(n),
                                        config.covariance_kind);
        }

        EStepResult es = e_step(data, model);
        std::vector<double> trace{es.avg_loglik};
        double prev_ll = es.avg_loglik;
        std::vector<int> collapse_counts(static_cast<std::size_t>(model.num_components()), 0);
        bool converged = false;
        int iterations = 0;

        while (iterations < config.max_iter) {
            MStepResult ms = m_step(data, es.responsibilities, config.covariance_kind, config.ridge);
            max_ridge = std::max(max_ridge, ms.max_ridge_used);
            ++iterations;

            bool restarted_component = false;
            if (!ms.collapsed.empty() && ms.weights.size() > 1) {
                // Prune components that keep collapsing; re-seed the others at
                // the sample the current model explains worst.
                std::vector<int> to_prune;
                for (int j : ms.collapsed) {
                    if (++collapse_counts[static_cast<std::size_t>(j)] > 3) {
                        to_prune.push_back(j);
                    } else {
                        Eigen::Index worst = 0;
                        double worst_ll = std::numeric_limits<double>::infinity();
                        for (Eigen::Index i = 0; i < n; ++i) {
                            const double ll = mixture_logdensity(data.row(i).transpose(), model);
                            if (ll < worst_ll) {
                                worst_ll = ll;
                                worst = i;
                            }
                        }
                        ms.means[static_cast<std::size_t>(j)] = data.row(worst).transpose();
                        ms.covariances[static_cast<std::size_t>(j)] =
                            regularize_covariance(global_scatter, config.ridge).matrix;
                        ms.weights[j] = 1.0 / static_cast<double>(ms.weights.size());
                    }
                }
                for (auto it = to_prune.rbegin(); it != to_prune.rend(); ++it) {
                    const int j = *it;
                    if (ms.weights.size() <= 1) break;
                    Eigen::VectorXd w(ms.weights.size() - 1);
                    for (Eigen::Index src = 0, dst = 0; src < ms.weights.size(); ++src) {
                        if (src != j) w[dst++] = ms.weights[src];
                    }
                    ms.weights = std::move(w);
                    ms.means.erase(ms.means.begin() + j);
                    ms.covariances.erase(ms.covariances.begin() + j);
                    collapse_counts.erase(collapse_counts.begin() + j);
                }
                restarted_component = true;
            }

            MixtureModel candidate = assemble(std::move(ms.weights), std::move(ms.means),
                                              std::move(ms.covariances), config.covariance_kind);
            EStepResult es_next = e_step(data, candidate);

            if (restarted_component) {
                // New objective landscape; monotonicity restarts here.
                model = std::move(candidate);
                es = std::move(es_next);
                trace.assign(1, es.avg_loglik);
                prev_ll = es.avg_loglik;
                continue;
            }

            if (es_next.avg_loglik < prev_ll) {
                // Ridge regularization can nick the likelihood right at the
                // fixed point; keep the better parameters and stop.
                converged = true;
                break;
            }

            model = std::move(candidate);
            es = std::move(es_next);
            trace.push_back(es.avg_loglik);
            const double gain = es.avg_loglik - prev_ll;
            prev_ll = es.avg_loglik;
            if (gain <= config.rel_tol * std::max(1.0, std::abs(prev_ll))) {
                converged = true;
                break;
            }
        }

        model.fit_info.n_iterations = iterations;
        model.fit_info.final_avg_loglik = trace.back();
        model.fit_info.loglik_trace = std::move(trace);
        model.fit_info.converged = converged;
        model.fit_info.seed = config.seed;
        model.fit_info.ridge_used = max_ridge;
        model.fit_info.restart_index = restart_index;
        run.model = std::move(model);
        run.ok = true;
    } catch (const Error& e) {
        run.ok = false;
        run.error_code = e.code();
        run.error_message = e.what();
    }
    return run;
}

} // namespace

const char* covariance_kind_name(CovarianceKind kind) {
    return kind == CovarianceKind::full ? "full" : "diagonal";
}

CovarianceKind covariance_kind_from_name(std::string_view name) {
    if (name == "full") return CovarianceKind::full;
    if (name == "diagonal" || name == "diag") return CovarianceKind::diagonal;
    fail("invalid_parameter", "unknown covariance kind: '" + std::string(name) + "'");
}

double mixture_logdensity(const Eigen::VectorXd& x, const MixtureModel& model) {
    std::vector<double> joint;
    log_joint_row(x, model, joint);
    return log_sum_exp(joint);
}

EStepResult e_step(const Eigen::MatrixXd& data, const MixtureModel& model) {
    check_data(data);
    const Eigen::Index n = data.rows();
    const int m = model.num_components();
    require(m >= 1, "invalid_parameter", "model has no components");
    require(data.cols() == model.dim(), "dimension_mismatch",
            "expected dimension " + std::to_string(model.dim()) + ", received " +
                std::to_string(data.cols()));

    EStepResult result;
    result.responsibilities.resize(n, m);
    double total = 0.0;
    std::vector<double> joint;
    for (Eigen::Index i = 0; i < n; ++i) {
        log_joint_row(data.row(i).transpose(), model, joint);
        const double lse = log_sum_exp(joint);
        total += lse;
        double row_sum = 0.0;
        for (int j = 0; j < m; ++j) {
            const double g = std::exp(joint[static_cast<std::size_t>(j)] - lse);
            result.responsibilities(i, j) = g;
            row_sum += g;
        }
        result.responsibilities.row(i) /= row_sum;
    }
    result.avg_loglik = total / static_cast<double>(n);
    return result;
}

MStepResult m_step(const Eigen::MatrixXd& data, const Eigen::MatrixXd& responsibilities,
                   CovarianceKind kind, double ridge) {
    check_data(data);
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    const Eigen::Index m = responsibilities.cols();
    require(responsibilities.rows() == n, "dimension_mismatch",
            "responsibilities rows do not match data rows");

    MStepResult result;
    result.weights.resize(m);
    result.means.resize(static_cast<std::size_t>(m));
    result.covariances.resize(static_cast<std::size_t>(m));

    const Eigen::VectorXd mass = responsibilities.colwise().sum();
    const double mass_floor = static_cast<double>(d) + 1.0;

    for (Eigen::Index j = 0; j < m; ++j) {
        const double nj = mass[j];
        result.weights[j] = nj / static_cast<double>(n);
        if (nj > 0.0) {
            const Eigen::VectorXd gamma = responsibilities.col(j);
            const Eigen::VectorXd mu = data.transpose() * gamma / nj;
            const Eigen::MatrixXd centered = data.rowwise() - mu.transpose();
            const Eigen::MatrixXd weighted =
                (centered.array().colwise() * gamma.array()).matrix();
            Eigen::MatrixXd scatter = weighted.transpose() * centered / nj;
            result.means[static_cast<std::size_t>(j)] = mu;
            auto reg = regularize_covariance(apply_kind(std::move(scatter), kind), ridge,
                                             "component " + std::to_string(j));
            result.max_ridge_used = std::max(result.max_ridge_used, reg.ridge_used);
            result.covariances[static_cast<std::size_t>(j)] = std::move(reg.matrix);
        } else {
            // Placeholder parameters; the caller re-seeds collapsed components.
            result.means[static_cast<std::size_t>(j)] = data.colwise().mean().transpose();
            auto reg = regularize_covariance(Eigen::MatrixXd::Zero(d, d), ridge);
            result.max_ridge_used = std::max(result.max_ridge_used, reg.ridge_used);
            result.covariances[static_cast<std::size_t>(j)] = std::move(reg.matrix);
        }
        if (nj < mass_floor) result.collapsed.push_back(static_cast<int>(j));
    }
    return result;
}

KmeansInit kmeanspp_init(const Eigen::MatrixXd& data, int num_clusters, std::uint64_t seed) {
    check_data(data);
    const Eigen::Index n = data.rows();
    require(num_clusters >= 1, "invalid_parameter", "cluster count must be >= 1");
    require(n >= num_clusters, "insufficient_data",
            "need at least " + std::to_string(num_clusters) + " rows, received " +
                std::to_string(n));

    Rng rng(seed);
    const int k = num_clusters;

    // Seeding: first center uniform, the rest proportional to the squared
    // distance to the nearest chosen center.
    std::vector<Eigen::Index> centers;
    centers.reserve(static_cast<std::size_t>(k));
    std::vector<double> dist2(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    centers.push_back(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
    chosen[static_cast<std::size_t>(centers[0])] = 1;
    while (static_cast<int>(centers.size()) < k) {
        const Eigen::Index last = centers.back();
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d2 = (data.row(i) - data.row(last)).squaredNorm();
            auto& best = dist2[static_cast<std::size_t>(i)];
            best = std::min(best, d2);
            total += best;
        }
        Eigen::Index pick = -1;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                u -= dist2[static_cast<std::size_t>(i)];
                if (u <= 0.0) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) {
                for (Eigen::Index i = n - 1; i >= 0; --i) {
                    if (dist2[static_cast<std::size_t>(i)] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        }
        if (pick < 0) {
            // Only duplicate points remain; pick uniformly among the unchosen.
            std::vector<Eigen::Index> open;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!chosen[static_cast<std::size_t>(i)]) open.push_back(i);
            }
            pick = open[rng.index(open.size())];
        }
        centers.push_back(pick);
        chosen[static_cast<std::size_t>(pick)] = 1;
        dist2[static_cast<std::size_t>(pick)] = 0.0;
    }

    std::vector<Eigen::VectorXd> means;
    means.reserve(static_cast<std::size_t>(k));
    for (Eigen::Index c : centers) means.push_back(data.row(c).transpose());

    std::vector<int> assignments(static_cast<std::size_t>(n), 0);
    for (int iter = 0; iter < 20; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const double d2 =
                    (data.row(i).transpose() - means[static_cast<std::size_t>(j)]).squaredNorm();
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = j;
                }
            }
            if (assignments[static_cast<std::size_t>(i)] != best) {
                assignments[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }

        // Give emptied clusters the point farthest from its current center.
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (auto a : assignments) ++counts[static_cast<std::size_t>(a)];
        for (int j = 0; j < k; ++j) {
            if (counts[static_cast<std::size_t>(j)] > 0) continue;
            Eigen::Index farthest = 0;
            double far_d2 = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const int a = assignments[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(a)] <= 1) continue;
                const double d2 =
                    (data.row(i).transpose() - means[static_cast<std::size_t>(a)]).squaredNorm();
                if (d2 > far_d2) {
                    far_d2 = d2;
                    farthest = i;
                }
            }
            --counts[static_cast<std::size_t>(assignments[static_cast<std::size_t>(farthest)])];
            assignments[static_cast<std::size_t>(farthest)] = j;
            counts[static_cast<std::size_t>(j)] = 1;
            changed = true;
        }

        for (int j = 0; j < k; ++j) {
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(data.cols());
            Eigen::Index cnt = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (assignments[static_cast<std::size_t>(i)] == j) {
                    sum += data.row(i).transpose();
                    ++cnt;
                }
            }
            if (cnt > 0) means[static_cast<std::size_t>(j)] = sum / static_cast<double>(cnt);
        }
        if (!changed && iter > 0) break;
    }

    return {std::move(means), std::move(assignments)};
}

MixtureModel fit_em(const Eigen::MatrixXd& data, int num_components, const EmConfig& config) {
    check_data(data);
    check_config(config);
    require(num_components >= 1, "invalid_parameter", "component count must be >= 1");
    require(data.rows() >= num_components, "insufficient_data",
            "cannot fit " + std::to_string(num_components) + " components on " +
                std::to_string(data.rows()) + " rows");

    EmRun best;
    std::string last_code = "degenerate_fit";
    std::string last_message = "all EM restarts failed";
    for (int r = 0; r < config.n_restarts; ++r) {
        EmRun run = run_em_once(data, num_components, config, r);
        if (!run.ok) {
            last_code = run.error_code;
            last_message = run.error_message;
            continue;
        }
        if (!best.ok || run.model.fit_info.final_avg_loglik > best.model.fit_info.final_avg_loglik) {
            best = std::move(run);
        }
    }
    if (!best.ok) {
        fail("degenerate_fit",
             "all " + std::to_string(config.n_restarts) + " EM restarts failed; last error [" +
                 last_code + "]: " + last_message);
    }
    return std::move(best.model);
}

int bic_parameter_count(int num_components, int dim, CovarianceKind kind) {
    const int m = num_components;
    const int d = dim;
    const int cov_terms = (kind == CovarianceKind::full) ? m * d * (d + 1) / 2 : m * d;
    return (m - 1) + m * d + cov_terms;
}

SelectionResult select_components(const Eigen::MatrixXd& data, const std::vector<int>& candidates,
                                  const EmConfig& config) {
    require(!candidates.empty(), "invalid_parameter", "empty candidate list");
    check_data(data);
    const double n = static_cast<double>(data.rows());
    const int d = static_cast<int>(data.cols());

    SelectionResult result;
    bool have_best = false;
    double best_bic = 0.0;
    for (int m : candidates) {
        require(m >= 1, "invalid_parameter", "component count must be >= 1");
        require(m <= data.rows(), "insufficient_data",
                "candidate " + std::to_string(m) + " exceeds row count " +
                    std::to_string(data.rows()));
        MixtureModel model = fit_em(data, m, config);
        const double k = static_cast<double>(bic_parameter_count(m, d, config.covariance_kind));
        const double bic = -2.0 * (n * model.fit_info.final_avg_loglik) + k * std::log(n);
        result.scores.push_back({m, bic});
        if (!have_best || bic < best_bic || (bic == best_bic && m < result.best_m)) {
            have_best = true;
            best_bic = bic;
            result.best_m = m;
            result.best_model = std::move(model);
        }
    }
    return result;
}

} // namespace amgmm
