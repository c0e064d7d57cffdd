#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "amgmm/classifier.hpp"

namespace amgmm {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kToolVersion = "amgmm 0.1.0";

struct ModelProvenance {
    std::uint64_t seed = 0;
    std::string data_fingerprint; // "fnv1a64:<16 hex>" of the training file bytes
    std::string tool_version = kToolVersion;
};

// Everything needed to reproduce predictions exactly: classifier state,
// pipeline statistics, and provenance. Saved as versioned JSON with
// round-trip-exact numbers; loading a file written by a newer format is
// rejected.
struct ModelArtifact {
    GenerativeClassifier classifier;
    ModelProvenance provenance;
};

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

std::string fingerprint_file(const std::filesystem::path& path);
std::string fingerprint_bytes(std::string_view bytes);

} // namespace amgmm
