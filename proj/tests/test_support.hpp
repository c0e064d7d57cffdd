#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "amgmm/error.hpp"
#include "amgmm/rng.hpp"

namespace test_support {

// Runs f and returns the thrown error code, or "" when nothing was thrown.
inline std::string thrown_code(const std::function<void()>& f) {
    try {
        f();
    } catch (const amgmm::Error& e) {
        return e.code();
    }
    return "";
}

inline Eigen::MatrixXd random_spd(amgmm::Rng& rng, Eigen::Index d) {
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = rng.normal();
    }
    return a * a.transpose() + Eigen::MatrixXd::Identity(d, d);
}

inline double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_var(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

inline double excess_kurtosis(const std::vector<double>& v) {
    const double m = sample_mean(v);
    const double var = sample_var(v);
    double fourth = 0.0;
    for (double x : v) fourth += std::pow(x - m, 4.0);
    fourth /= static_cast<double>(v.size());
    return fourth / (var * var) - 3.0;
}

} // namespace test_support
