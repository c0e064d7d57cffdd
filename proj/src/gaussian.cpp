#include "amgmm/gaussian.hpp"

#include <cmath>
#include <string>

#include "amgmm/error.hpp"
#include "amgmm/numeric.hpp"

namespace amgmm {

namespace {

std::string with_context(std::string message, std::string_view context) {
    if (!context.empty()) {
        message += " (";
        message += context;
        message += ")";
    }
    return message;
}

// Cholesky with an explicit positivity check on the pivots; Eigen's LLT can
// report Success on barely semidefinite input.
bool try_cholesky(const Eigen::MatrixXd& m, Eigen::MatrixXd& lower) {
    if (!m.allFinite()) return false;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return false;
    lower = llt.matrixL();
    return (lower.diagonal().array() > 0.0).all() && lower.allFinite();
}

} // namespace

GaussianComponent make_gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance,
                                std::string_view context) {
    require(covariance.rows() == covariance.cols(), "invalid_parameter",
            with_context("covariance must be square", context));
    require(mean.size() == covariance.rows(), "dimension_mismatch",
            with_context("mean / covariance dimensions disagree", context));

    // M-step accumulation leaves 1-ulp asymmetries; a single triangle is
    // authoritative from here on.
    Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose());
    Eigen::MatrixXd lower;
    if (!try_cholesky(sym, lower)) {
        fail("singular_covariance",
             with_context("covariance is not positive definite", context));
    }
    GaussianComponent component;
    component.mean = std::move(mean);
    component.covariance = std::move(sym);
    component.chol_lower = std::move(lower);
    component.log_det = 2.0 * component.chol_lower.diagonal().array().log().sum();
    return component;
}

double gaussian_logpdf(const Eigen::VectorXd& x, const GaussianComponent& component) {
    const Eigen::Index d = component.dim();
    if (x.size() != d) {
        fail("dimension_mismatch", "expected dimension " + std::to_string(d) +
                                       ", received " + std::to_string(x.size()));
    }
    const Eigen::VectorXd z =
        component.chol_lower.triangularView<Eigen::Lower>().solve(x - component.mean);
    return -0.5 * (static_cast<double>(d) * kLog2Pi + component.log_det + z.squaredNorm());
}

RegularizedCovariance regularize_covariance(const Eigen::MatrixXd& scatter, double ridge,
                                            std::string_view context) {
    require(scatter.rows() == scatter.cols(), "invalid_parameter",
            with_context("scatter matrix must be square", context));
    require(ridge >= 0.0, "invalid_parameter", "ridge must be >= 0");
    require(scatter.allFinite(), "invalid_parameter",
            with_context("scatter matrix has non-finite entries", context));

    const Eigen::Index d = scatter.rows();
    const Eigen::MatrixXd sym = 0.5 * (scatter + scatter.transpose());
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);

    double r = ridge;
    constexpr int kMaxAttempts = 24;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Eigen::MatrixXd candidate = sym + r * identity;
        Eigen::MatrixXd lower;
        if (try_cholesky(candidate, lower)) {
            return {std::move(candidate), r};
        }
        r = (r == 0.0) ? 1e-10 : 2.0 * r;
    }
    fail("singular_covariance",
         with_context("covariance failed to factorize after ridge escalation", context));
}

} // namespace amgmm
