#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace amgmm {

inline constexpr double kLog2Pi = 1.8378770664093454836;

// Shortest decimal form that parses back to the identical double. All
// emitted CSV and text numbers go through this, which is what makes
// reruns byte-identical and external re-parsing exact.
std::string format_double(double value);

// Strict full-string parse. Rejects trailing junk; rejects inf/nan when
// require_finite is set.
double parse_double(std::string_view text, bool require_finite = true);

double log_sum_exp(std::span<const double> values);

double median(std::vector<double> values); // takes a scratch copy

// Standard normal CDF.
double normal_cdf(double z);

} // namespace amgmm
