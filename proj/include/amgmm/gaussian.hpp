#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace amgmm {

// One mixture component. Immutable after construction; the Cholesky factor
// and log-determinant are cached so density evaluation never re-factorizes
// or inverts. Safe to read from any number of threads.
struct GaussianComponent {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance; // symmetric positive definite as stored
    Eigen::MatrixXd chol_lower; // lower-triangular factor of covariance
    double log_det = 0.0;       // log det(covariance) = 2 * sum(log diag(chol_lower))

    Eigen::Index dim() const { return mean.size(); }
};

// Symmetrizes, factorizes and caches. Throws singular_covariance when the
// matrix is not positive definite; `context` names the offending component
// in the message.
GaussianComponent make_gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                                std::string_view context = {});

// log N(x; mean, covariance), evaluated through the cached triangular
// factor. Finite for every finite x when the factorization is valid.
double gaussian_logpdf(const Eigen::VectorXd& x, const GaussianComponent& component);

struct RegularizedCovariance {
    Eigen::MatrixXd matrix;
    double ridge_used = 0.0;
};

// (S + S^T)/2 + ridge*I. If the result still fails to factorize the ridge
// is doubled and retried a bounded number of times; the matrix that
// factorized is returned together with the ridge that achieved it.
RegularizedCovariance regularize_covariance(const Eigen::MatrixXd& scatter, double ridge,
                                            std::string_view context = {});

} // namespace amgmm
