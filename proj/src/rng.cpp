#include "amgmm/rng.hpp"

#include <cmath>

#include "amgmm/error.hpp"

namespace amgmm {

namespace {

// splitmix64 finalizer; also used statelessly for seed derivation.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

std::uint64_t Rng::derive_seed(std::uint64_t master, std::string_view name, std::uint64_t index) {
    std::uint64_t x = mix64(master);
    x = mix64(x ^ fnv1a64(name));
    return mix64(x ^ index);
}

Rng Rng::stream(std::uint64_t master, std::string_view name, std::uint64_t index) {
    return Rng(derive_seed(master, name, index));
}

std::uint64_t Rng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::size_t Rng::index(std::size_t n) {
    require(n > 0, "invalid_parameter", "Rng::index requires n > 0");
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double Rng::gamma(double shape) {
    require(shape > 0.0, "invalid_parameter", "gamma shape must be > 0");
    if (shape < 1.0) {
        const double u = 1.0 - uniform(); // (0, 1]
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::chi_squared(double dof) {
    require(dof > 0.0, "invalid_parameter", "chi_squared dof must be > 0");
    return 2.0 * gamma(0.5 * dof);
}

double Rng::student_t(double dof) {
    require(dof > 0.0, "invalid_parameter", "student_t dof must be > 0");
    double w;
    do {
        w = chi_squared(dof);
    } while (w <= 0.0);
    return normal() / std::sqrt(w / dof);
}

} // namespace amgmm
