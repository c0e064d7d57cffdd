#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "amgmm/classifier.hpp"
#include "amgmm/model_io.hpp"
#include "amgmm/rng.hpp"
#include "amgmm/synth.hpp"
#include "test_support.hpp"

using namespace amgmm;
using test_support::thrown_code;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("amgmm-io-" + std::to_string(::getpid()) + "-" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path file(const std::string& name) const { return path / name; }
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

ModelArtifact trained_artifact(std::uint64_t seed) {
    const Dataset data = synth_classification(SynthScenario::ded_like, 90, seed);
    TrainConfig config;
    config.seed = seed;
    config.energy = EnergyFeatureConfig{"laser_power", "scan_speed", kDedNominalSpecificHeat,
                                        "energy", false};
    ModelArtifact artifact;
    artifact.classifier = train_classifier(data, config);
    artifact.provenance.seed = seed;
    artifact.provenance.data_fingerprint = fingerprint_bytes("synthetic");
    return artifact;
}

} // namespace

TEST_CASE("save and load reproduce bit-identical posteriors") {
    TempDir tmp;
    const ModelArtifact artifact = trained_artifact(7);
    save_model(artifact, tmp.file("model.json"));
    const ModelArtifact loaded = load_model(tmp.file("model.json"));

    CHECK(loaded.classifier.classes == artifact.classifier.classes);
    CHECK(loaded.classifier.priors == artifact.classifier.priors);
    CHECK(loaded.provenance.seed == artifact.provenance.seed);
    CHECK(loaded.provenance.tool_version == std::string(kToolVersion));

    Rng rng(211);
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd probe(6);
        probe << 500.0 + 200.0 * rng.normal(), 6.0 + rng.uniform(-2.0, 2.0),
            4.0 + rng.normal(), 6.0 + rng.normal(), 20.0 + 3.0 * rng.normal(),
            0.7 + 0.1 * rng.normal();
        if (probe[1] <= 0.1) probe[1] = 0.1;
        const PosteriorVector a = posterior(probe, artifact.classifier);
        const PosteriorVector b = posterior(probe, loaded.classifier);
        CHECK(a.values == b.values);
        CHECK(a.log_evidence == b.log_evidence);
    }
}

TEST_CASE("two saves of the same artifact are byte-identical") {
    TempDir tmp;
    const ModelArtifact artifact = trained_artifact(13);
    save_model(artifact, tmp.file("a.json"));
    save_model(artifact, tmp.file("b.json"));
    CHECK(read_file(tmp.file("a.json")) == read_file(tmp.file("b.json")));
}

TEST_CASE("newer format versions are rejected") {
    TempDir tmp;
    const ModelArtifact artifact = trained_artifact(17);
    save_model(artifact, tmp.file("model.json"));
    std::string text = read_file(tmp.file("model.json"));
    const std::string needle = "\"format_version\": 1";
    const auto pos = text.find(needle);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, needle.size(), "\"format_version\": 99");
    write_file(tmp.file("future.json"), text);
    CHECK(thrown_code([&] { load_model(tmp.file("future.json")); }) == "model_format");
}

TEST_CASE("malformed model files are rejected") {
    TempDir tmp;
    write_file(tmp.file("junk.json"), "{ not json at all");
    CHECK(thrown_code([&] { load_model(tmp.file("junk.json")); }) == "model_format");

    write_file(tmp.file("hollow.json"), "{\"format_version\": 1}");
    CHECK(thrown_code([&] { load_model(tmp.file("hollow.json")); }) == "model_format");

    CHECK(thrown_code([&] { load_model(tmp.file("absent.json")); }) == "io_error");
}

TEST_CASE("the reject threshold survives the round trip") {
    TempDir tmp;
    ModelArtifact artifact = trained_artifact(19);
    artifact.classifier.reject_threshold = 0.65;
    save_model(artifact, tmp.file("model.json"));
    const ModelArtifact loaded = load_model(tmp.file("model.json"));
    REQUIRE(loaded.classifier.reject_threshold.has_value());
    CHECK(*loaded.classifier.reject_threshold == 0.65);
}

TEST_CASE("fingerprints are stable and marked with the algorithm") {
    const std::string fp = fingerprint_bytes("abc");
    CHECK(fp.substr(0, 8) == "fnv1a64:");
    CHECK(fp.size() == 8 + 16);

    // Independent FNV-1a reference.
    std::uint64_t h = 14695981039346656037ull;
    for (char c : std::string("abc")) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char expected[17];
    std::snprintf(expected, sizeof(expected), "%016llx", static_cast<unsigned long long>(h));
    CHECK(fp.substr(8) == std::string(expected));

    CHECK(fingerprint_bytes("abc") == fp);
    CHECK(fingerprint_bytes("abd") != fp);
}

TEST_CASE("file fingerprints hash the raw bytes") {
    TempDir tmp;
    write_file(tmp.file("data.bin"), "abc");
    CHECK(fingerprint_file(tmp.file("data.bin")) == fingerprint_bytes("abc"));
}
