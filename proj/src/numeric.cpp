#include "amgmm/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "amgmm/error.hpp"

namespace amgmm {

std::string format_double(double value) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, bool require_finite) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) {
        fail("csv_format", "not a numeric value: '" + std::string(text) + "'");
    }
    if (require_finite && !std::isfinite(value)) {
        fail("csv_format", "non-finite numeric value: '" + std::string(text) + "'");
    }
    return value;
}

double log_sum_exp(std::span<const double> values) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values) m = std::max(m, v);
    if (!std::isfinite(m)) return m; // all -inf (or an explicit +inf input)
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - m);
    return m + std::log(sum);
}

double median(std::vector<double> values) {
    require(!values.empty(), "invalid_parameter", "median of empty series");
    const std::size_t n = values.size();
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(values.begin(), mid);
    return 0.5 * (lo + hi);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

} // namespace amgmm
