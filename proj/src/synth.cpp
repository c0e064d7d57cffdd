#include "amgmm/synth.hpp"

#include <cmath>
#include <string>

#include "amgmm/error.hpp"
#include "amgmm/rng.hpp"

namespace amgmm {

namespace {

// Generalized-Gaussian draw, density proportional to exp(-|x|^beta).
// Accept/reject with a uniform proposal on [-L, L]; L^beta = 40 puts the
// truncated tail mass below double precision.
double generalized_gaussian(Rng& rng, double beta) {
    const double limit = std::pow(40.0, 1.0 / beta);
    for (;;) {
        const double x = rng.uniform(-limit, limit);
        const double u = rng.uniform();
        if (u <= std::exp(-std::pow(std::abs(x), beta))) return x;
    }
}

long long rounded_share(Eigen::Index n, double fraction) {
    return std::llround(static_cast<double>(n) * fraction);
}

} // namespace

SynthShape synth_shape_from_name(std::string_view name) {
    if (name == "unimodal") return SynthShape::unimodal;
    if (name == "bimodal") return SynthShape::bimodal;
    if (name == "flattened") return SynthShape::flattened;
    if (name == "heavy_tailed") return SynthShape::heavy_tailed;
    fail("invalid_parameter", "unknown shape: '" + std::string(name) + "'");
}

const char* synth_shape_name(SynthShape shape) {
    switch (shape) {
        case SynthShape::unimodal: return "unimodal";
        case SynthShape::bimodal: return "bimodal";
        case SynthShape::flattened: return "flattened";
        case SynthShape::heavy_tailed: return "heavy_tailed";
    }
    return "unimodal";
}

Dataset synth_generate(SynthShape shape, Eigen::Index n, Eigen::Index d, std::uint64_t seed,
                       const ShapeParams& params) {
    require(n >= 1, "invalid_parameter", "n must be >= 1");
    require(d >= 1, "invalid_parameter", "d must be >= 1");
    require(params.scale > 0.0, "invalid_parameter", "scale must be > 0");
    require(params.separation >= 0.0, "invalid_parameter", "separation must be >= 0");
    if (shape == SynthShape::flattened) {
        require(params.shape_exponent > 2.0, "invalid_parameter",
                "flattened shape exponent must be > 2");
    }
    if (shape == SynthShape::heavy_tailed) {
        require(params.dof > 0.0, "invalid_parameter", "dof must be > 0");
    }

    Rng rng = Rng::stream(seed, "synthesis", static_cast<std::uint64_t>(shape));

    Dataset dataset;
    for (Eigen::Index j = 0; j < d; ++j) {
        dataset.schema.push_back({"x" + std::to_string(j + 1), ""});
    }
    dataset.rows.resize(n, d);
    dataset.labels.assign(static_cast<std::size_t>(n), Label::unlabeled);
    dataset.provenance = std::string("synth:shape=") + synth_shape_name(shape) +
                         ",n=" + std::to_string(n) + ",d=" + std::to_string(d) +
                         ",seed=" + std::to_string(seed);

    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            double value = 0.0;
            switch (shape) {
                case SynthShape::unimodal:
                    value = params.mean + params.scale * rng.normal();
                    break;
                case SynthShape::bimodal:
                    if (j == 0) {
                        const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
                        const double center =
                            params.mean + side * 0.5 * params.separation * params.scale;
                        value = center + params.scale * rng.normal();
                    } else {
                        value = params.mean + params.scale * rng.normal();
                    }
                    break;
                case SynthShape::flattened:
                    value = params.mean +
                            params.scale * generalized_gaussian(rng, params.shape_exponent);
                    break;
                case SynthShape::heavy_tailed:
                    value = params.mean + params.scale * rng.student_t(params.dof);
                    break;
            }
            dataset.rows(i, j) = value;
        }
    }
    return dataset;
}

SynthScenario synth_scenario_from_name(std::string_view name) {
    if (name == "lpbf_like") return SynthScenario::lpbf_like;
    if (name == "ded_like") return SynthScenario::ded_like;
    fail("invalid_parameter", "unknown scenario: '" + std::string(name) + "'");
}

const char* synth_scenario_name(SynthScenario scenario) {
    return scenario == SynthScenario::lpbf_like ? "lpbf_like" : "ded_like";
}

Dataset synth_classification(SynthScenario scenario, Eigen::Index n, std::uint64_t seed,
                             double overlap) {
    require(n >= 20, "invalid_parameter", "scenario generation needs n >= 20");
    const double sep = 1.0 - std::clamp(overlap, 0.0, 1.0);

    Rng rng = Rng::stream(seed, "synthesis",
                          100 + static_cast<std::uint64_t>(scenario));

    Dataset dataset;
    dataset.provenance = std::string("synth:scenario=") + synth_scenario_name(scenario) +
                         ",n=" + std::to_string(n) + ",seed=" + std::to_string(seed);

    if (scenario == SynthScenario::lpbf_like) {
        dataset.schema = schema_preset(SchemaPresetKind::lpbf);
        const Eigen::Index n_ok = static_cast<Eigen::Index>(rounded_share(n, 0.52));
        const Eigen::Index n_defect = n - n_ok;
        require(n_ok >= 1 && n_defect >= 1, "invalid_parameter",
                "n too small to realize both label groups");

        dataset.rows.resize(n, 6);
        dataset.labels.clear();
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool defect = i >= n_ok;
            const double t = defect ? sep : 0.0;
            const double power = 250.0 + t * 120.0 + 12.0 * rng.normal();
            const double speed = 950.0 + t * 320.0 + 40.0 * rng.normal();
            const double size = 30.0 + t * 4.0 + 4.0 * rng.student_t(6.0);
            const double beam = 0.10 + 0.012 * generalized_gaussian(rng, 4.0);
            const double layer = 0.04 + 0.004 * rng.normal();
            const double diffusivity = 4.5e-6 + 4.5e-7 * rng.normal();
            dataset.rows.row(i) << power, speed, size, beam, layer, diffusivity;
            dataset.labels.push_back(defect ? Label::defect : Label::no_defect);
        }
        return dataset;
    }

    dataset.schema = schema_preset(SchemaPresetKind::ded);
    const Eigen::Index n_ok = static_cast<Eigen::Index>(rounded_share(n, 0.5));
    const Eigen::Index n_defect = static_cast<Eigen::Index>(rounded_share(n, 0.4));
    const Eigen::Index n_inconclusive = n - n_ok - n_defect;
    require(n_ok >= 1 && n_defect >= 1 && n_inconclusive >= 1, "invalid_parameter",
            "n too small to realize all three label groups");

    dataset.rows.resize(n, 6);
    dataset.labels.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
        Label label = Label::no_defect;
        double group = 0.0; // displacement multiplier
        if (i >= n_ok + n_defect) {
            label = Label::inconclusive;
            group = 0.5; // borderline process window
        } else if (i >= n_ok) {
            label = Label::defect;
            group = 1.0;
        }
        const double t = group * sep;

        // Two machine operating points make the speed marginal bimodal for
        // every label; the latent energy level stays unimodal because the
        // class shift is capped at one energy-sigma.
        const double speed_mode = rng.uniform() < 0.5 ? 4.0 : 8.0;
        const double speed = speed_mode + t * 0.3 + 0.5 * rng.normal();
        const double energy = 0.33 + t * 0.02 + 0.02 * rng.normal();
        const double power = energy * kDedNominalSpecificHeat * speed;

        const double flow = 4.0 + t * 4.2 + 0.35 * rng.normal();
        const double gas = 6.0 + t * 6.4 + 0.8 * generalized_gaussian(rng, 4.0);
        const double length = 20.0 + 3.0 * rng.normal();
        const double height = 0.7 + t * 0.48 + 0.08 * rng.student_t(6.0);

        dataset.rows.row(i) << power, speed, flow, gas, length, height;
        dataset.labels.push_back(label);
    }
    return dataset;
}

} // namespace amgmm
