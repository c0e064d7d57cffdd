#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "amgmm/gaussian.hpp"

namespace amgmm {

enum class CovarianceKind { full, diagonal };

const char* covariance_kind_name(CovarianceKind kind);
CovarianceKind covariance_kind_from_name(std::string_view name);

struct EmConfig {
    std::uint64_t seed = 0;
    int max_iter = 500;
    // Converged when the average log-likelihood improves by less than
    // rel_tol * max(1, |previous|).
    double rel_tol = 1e-6;
    double ridge = 1e-6;
    CovarianceKind covariance_kind = CovarianceKind::full;
    int n_restarts = 4;
};

struct FitReport {
    int n_iterations = 0;
    double final_avg_loglik = 0.0;
    // Average log-likelihood per accepted EM step. Non-decreasing; a
    // component re-initialization starts a fresh trace segment.
    std::vector<double> loglik_trace;
    bool converged = false;
    std::uint64_t seed = 0;
    double ridge_used = 0.0;
    int restart_index = 0;
};

struct MixtureModel {
    Eigen::VectorXd weights; // mixing proportions, nonnegative, sum to 1
    std::vector<GaussianComponent> components;
    CovarianceKind covariance_kind = CovarianceKind::full;
    FitReport fit_info;

    Eigen::Index dim() const { return components.empty() ? 0 : components.front().dim(); }
    int num_components() const { return static_cast<int>(components.size()); }
};

// log sum_m weight_m * N(x; mean_m, cov_m), via log-sum-exp. Components
// with zero weight are skipped.
double mixture_logdensity(const Eigen::VectorXd& x, const MixtureModel& model);

struct EStepResult {
    Eigen::MatrixXd responsibilities; // n x M, rows sum to 1
    double avg_loglik = 0.0;
};
EStepResult e_step(const Eigen::MatrixXd& data, const MixtureModel& model);

struct MStepResult {
    Eigen::VectorXd weights;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covariances; // already ridge-regularized
    std::vector<int> collapsed;               // components with mass below d+1
    double max_ridge_used = 0.0;
};
MStepResult m_step(const Eigen::MatrixXd& data, const Eigen::MatrixXd& responsibilities,
                   CovarianceKind kind, double ridge);

struct KmeansInit {
    std::vector<Eigen::VectorXd> means;
    std::vector<int> assignments;
};
// k-means++ seeding followed by at most 20 Lloyd iterations. Deterministic
// given the seed.
KmeansInit kmeanspp_init(const Eigen::MatrixXd& data, int num_clusters, std::uint64_t seed);

// Fits by EM with n_restarts independent k-means++ seedings and returns the
// run with the highest final average log-likelihood. Deterministic given
// config.seed regardless of restart execution order.
MixtureModel fit_em(const Eigen::MatrixXd& data, int num_components, const EmConfig& config);

// Free parameter count used by the BIC penalty.
int bic_parameter_count(int num_components, int dim, CovarianceKind kind);

struct ComponentScore {
    int num_components = 0;
    double bic = 0.0;
};
struct SelectionResult {
    int best_m = 0;
    std::vector<ComponentScore> scores;
    MixtureModel best_model;
};
// Fits each candidate component count and picks the BIC minimizer; ties go
// to the smaller count.
SelectionResult select_components(const Eigen::MatrixXd& data, const std::vector<int>& candidates,
                                  const EmConfig& config);

} // namespace amgmm
