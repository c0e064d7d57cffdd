#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace amgmm {

// Deterministic 64-bit generator (splitmix64). Every random draw in the
// project flows through this class so that a single master seed, fanned out
// into named sub-streams, reproduces artifacts bit for bit.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Independent stream keyed by (master, name, index). Streams derived
    // from distinct keys do not share state, so callers may consume them
    // in any order (or concurrently) without changing results.
    static Rng stream(std::uint64_t master, std::string_view name, std::uint64_t index = 0);
    static std::uint64_t derive_seed(std::uint64_t master, std::string_view name,
                                     std::uint64_t index = 0);

    std::uint64_t next_u64();

    double uniform();                    // [0, 1)
    double uniform(double lo, double hi);
    std::size_t index(std::size_t n);    // uniform over [0, n), n > 0

    double normal();                     // standard normal, Marsaglia polar
    double gamma(double shape);          // unit scale, shape > 0
    double chi_squared(double dof);
    double student_t(double dof);

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace amgmm
