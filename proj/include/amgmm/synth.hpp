#pragma once

#include <cstdint>
#include <string_view>

#include "amgmm/dataset.hpp"

namespace amgmm {

enum class SynthShape { unimodal, bimodal, flattened, heavy_tailed };

SynthShape synth_shape_from_name(std::string_view name);
const char* synth_shape_name(SynthShape shape);

struct ShapeParams {
    double mean = 0.0;
    double scale = 1.0;
    // Bimodal: distance between the two centers, in component-std units.
    double separation = 4.0;
    // Flattened bell: exponent of the generalized-Gaussian density
    // exp(-|x|^beta); must exceed 2 (larger is flatter).
    double shape_exponent = 4.0;
    // Heavy tails: Student-t degrees of freedom.
    double dof = 3.0;
};

// Unlabeled single-shape dataset, columns x1..xd. The bimodal shape splits
// along the first coordinate; the others stay unimodal. Deterministic
// given (shape, n, d, seed, params).
Dataset synth_generate(SynthShape shape, Eigen::Index n, Eigen::Index d, std::uint64_t seed,
                       const ShapeParams& params = {});

enum class SynthScenario { lpbf_like, ded_like };

SynthScenario synth_scenario_from_name(std::string_view name);
const char* synth_scenario_name(SynthScenario scenario);

// Labeled process-parameter dataset under the matching schema preset.
// lpbf_like: 52/48 no-defect/defect. ded_like: 50/40/10
// no-defect/defect/inconclusive with a bimodal scan-speed marginal; power
// is generated as energy * Cp * speed so the normalized-energy surrogate
// stays unimodal. `overlap` in [0, 1] shrinks the class displacement;
// 0 separates maximally, 1 makes the classes identical.
Dataset synth_classification(SynthScenario scenario, Eigen::Index n, std::uint64_t seed,
                             double overlap = 0.5);

// Specific heat constant the ded_like generator couples power and speed
// through; using the same value for the energy feature recovers the latent
// energy variable exactly.
inline constexpr double kDedNominalSpecificHeat = 450.0;

} // namespace amgmm
