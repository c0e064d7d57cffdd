#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace amgmm {

// Tri-state sample label plus a marker for unlabeled rows. Inconclusive
// rows never train; they ride along to the test side of splits and are
// excluded from accuracy denominators.
enum class Label : std::uint8_t { no_defect = 0, defect = 1, inconclusive = 2, unlabeled = 3 };

const char* label_name(Label label);

struct Column {
    std::string name;
    std::string unit;
};

struct Dataset {
    std::vector<Column> schema;
    Eigen::MatrixXd rows; // n x d, every entry finite
    std::vector<Label> labels;
    std::string provenance;

    Eigen::Index n() const { return rows.rows(); }
    Eigen::Index dim() const { return rows.cols(); }
    bool has_labels() const;
    std::vector<std::string> column_names() const;
    Eigen::Index column_index(const std::string& name) const; // -1 when absent
};

enum class SchemaPresetKind { lpbf, ded, custom };

SchemaPresetKind schema_preset_from_name(std::string_view name);
const char* schema_preset_name(SchemaPresetKind kind);

// Fixed process-parameter schemas for the two machine families; custom is
// empty (columns come from the file).
std::vector<Column> schema_preset(SchemaPresetKind kind);

using LabelMapping = std::map<std::string, Label>;
LabelMapping default_label_mapping();

// Header-matched CSV ingestion. Preset columns are located by name in any
// order; columns outside the schema are ignored. Missing values and
// non-numeric cells are errors, not imputations.
Dataset load_csv(const std::filesystem::path& path, const std::vector<Column>& schema,
                 const std::string& label_column, const LabelMapping& mapping,
                 bool require_label_column = true);

void save_csv(const Dataset& dataset, const std::filesystem::path& path,
              const std::string& label_column = "label");

struct SplitResult {
    Dataset train;
    Dataset test;
};

// Seeded train/test split. Stratified mode shuffles per label group and
// apportions floor(pool * fraction) test rows by largest remainder, so the
// fractional remainder stays in train. Inconclusive rows always land on
// the test side. Row order within each side follows the source.
SplitResult split(const Dataset& dataset, double test_fraction, std::uint64_t seed,
                  bool stratified);

} // namespace amgmm
