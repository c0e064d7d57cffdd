#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>

#include "amgmm/dataset.hpp"
#include "amgmm/features.hpp"
#include "amgmm/synth.hpp"
#include "test_support.hpp"

using namespace amgmm;
using test_support::excess_kurtosis;
using test_support::thrown_code;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("amgmm-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path file(const std::string& name) const { return path / name; }
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

std::vector<std::size_t> label_counts(const Dataset& data) {
    std::vector<std::size_t> counts(4, 0);
    for (Label l : data.labels) ++counts[static_cast<std::size_t>(l)];
    return counts;
}

} // namespace

TEST_CASE("schema presets carry the documented columns and units") {
    const auto lpbf = schema_preset(SchemaPresetKind::lpbf);
    REQUIRE(lpbf.size() == 6);
    CHECK(lpbf[0].name == "laser_power");
    CHECK(lpbf[0].unit == "W");
    CHECK(lpbf[1].name == "scan_speed");
    CHECK(lpbf[1].unit == "mm/s");
    CHECK(lpbf[2].name == "powder_size");
    CHECK(lpbf[2].unit == "um");
    CHECK(lpbf[3].name == "beam_diameter");
    CHECK(lpbf[3].unit == "mm");
    CHECK(lpbf[4].name == "layer_thickness");
    CHECK(lpbf[4].unit == "mm");
    CHECK(lpbf[5].name == "thermal_diffusivity");
    CHECK(lpbf[5].unit == "m^2/s");

    const auto ded = schema_preset(SchemaPresetKind::ded);
    REQUIRE(ded.size() == 6);
    CHECK(ded[0].name == "laser_power");
    CHECK(ded[1].name == "scan_speed");
    CHECK(ded[2].name == "powder_flow");
    CHECK(ded[2].unit == "rpm");
    CHECK(ded[3].name == "powder_gas");
    CHECK(ded[3].unit == "lpm");
    CHECK(ded[4].name == "track_length");
    CHECK(ded[5].name == "track_height");

    CHECK(schema_preset(SchemaPresetKind::custom).empty());
}

TEST_CASE("csv round trip preserves values bit for bit") {
    TempDir tmp;
    Dataset dataset;
    dataset.schema = {{"a", ""}, {"b", ""}};
    dataset.rows.resize(3, 2);
    dataset.rows << 1.0 / 3.0, 6.02214076e23, -1e-17, 0.1, 12345.6789, 2.2250738585072014e-308;
    dataset.labels = {Label::no_defect, Label::defect, Label::inconclusive};

    save_csv(dataset, tmp.file("data.csv"));
    const Dataset loaded =
        load_csv(tmp.file("data.csv"), {}, "label", default_label_mapping(), true);
    CHECK(loaded.rows == dataset.rows);
    CHECK(loaded.labels == dataset.labels);
    CHECK(loaded.column_names() == dataset.column_names());
}

TEST_CASE("preset loading matches columns by name in any order, extras ignored") {
    TempDir tmp;
    write_file(tmp.file("d.csv"),
               "note,scan_speed,laser_power,powder_flow,powder_gas,track_length,track_height,"
               "label\n"
               "9,2,1,3,4,5,6,defect\n"
               "9,20,10,30,40,50,60,no_defect\n");
    const Dataset data = load_csv(tmp.file("d.csv"), schema_preset(SchemaPresetKind::ded), "label",
                                  default_label_mapping(), true);
    CHECK(data.dim() == 6);
    CHECK(data.rows(0, 0) == 1.0); // laser_power leads despite file order
    CHECK(data.rows(0, 1) == 2.0);
    CHECK(data.labels[0] == Label::defect);
}

TEST_CASE("custom label mappings fold aliases into the tri-state labels") {
    TempDir tmp;
    write_file(tmp.file("d.csv"), "a,quality\n1,ok\n2,defect\n");
    LabelMapping mapping = default_label_mapping();
    mapping["ok"] = Label::no_defect;
    const Dataset data = load_csv(tmp.file("d.csv"), {}, "quality", mapping, true);
    CHECK(data.labels[0] == Label::no_defect);
    CHECK(data.labels[1] == Label::defect);
}

TEST_CASE("unmapped label strings are listed in the error") {
    TempDir tmp;
    write_file(tmp.file("d.csv"), "a,label\n1,meh\n2,bleh\n");
    try {
        load_csv(tmp.file("d.csv"), {}, "label", default_label_mapping(), true);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == "unknown_label");
        CHECK(std::string(e.what()).find("meh") != std::string::npos);
        CHECK(std::string(e.what()).find("bleh") != std::string::npos);
    }
}

TEST_CASE("load errors: empty, header-only, duplicates, bad cells, missing columns") {
    TempDir tmp;
    write_file(tmp.file("empty.csv"), "");
    CHECK(thrown_code([&] {
              load_csv(tmp.file("empty.csv"), {}, "", default_label_mapping(), false);
          }) == "empty_dataset");

    write_file(tmp.file("header.csv"), "a,b\n");
    CHECK(thrown_code([&] {
              load_csv(tmp.file("header.csv"), {}, "", default_label_mapping(), false);
          }) == "empty_dataset");

    write_file(tmp.file("dup.csv"), "a,a\n1,2\n");
    CHECK(thrown_code([&] {
              load_csv(tmp.file("dup.csv"), {}, "", default_label_mapping(), false);
          }) == "csv_format");

    write_file(tmp.file("bad.csv"), "a,b\n1,2\n1,zap\n");
    try {
        load_csv(tmp.file("bad.csv"), {}, "", default_label_mapping(), false);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == "csv_format");
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        CHECK(std::string(e.what()).find("'b'") != std::string::npos);
    }

    write_file(tmp.file("missing.csv"), "laser_power\n1\n");
    CHECK(thrown_code([&] {
              load_csv(tmp.file("missing.csv"), schema_preset(SchemaPresetKind::lpbf), "",
                       default_label_mapping(), false);
          }) == "schema_mismatch");

    write_file(tmp.file("inf.csv"), "a\ninf\n");
    CHECK(thrown_code([&] {
              load_csv(tmp.file("inf.csv"), {}, "", default_label_mapping(), false);
          }) == "csv_format");
}

TEST_CASE("stratified split hits the documented 60-row allocation") {
    Dataset data = synth_classification(SynthScenario::lpbf_like, 60, 3);
    const SplitResult result = split(data, 0.2, 7, true);
    CHECK(result.test.n() == 12);
    CHECK(result.train.n() == 48);
    const auto train_counts = label_counts(result.train);
    const auto test_counts = label_counts(result.test);
    CHECK(test_counts[0] == 6);
    CHECK(test_counts[1] == 6);
    CHECK(train_counts[0] == 25);
    CHECK(train_counts[1] == 23);
}

TEST_CASE("split conserves labels and never duplicates a row") {
    Dataset data = synth_classification(SynthScenario::ded_like, 90, 5);
    const SplitResult result = split(data, 0.2, 11, true);
    CHECK(result.train.n() + result.test.n() == data.n());

    const auto total = label_counts(data);
    const auto train_counts = label_counts(result.train);
    const auto test_counts = label_counts(result.test);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(train_counts[i] + test_counts[i] == total[i]);
    }

    std::set<std::string> seen;
    const auto fingerprint_rows = [&](const Dataset& side) {
        for (Eigen::Index i = 0; i < side.n(); ++i) {
            std::string key;
            for (Eigen::Index j = 0; j < side.dim(); ++j) {
                key += std::to_string(side.rows(i, j)) + "|";
            }
            CHECK(seen.insert(key).second);
        }
    };
    fingerprint_rows(result.train);
    fingerprint_rows(result.test);
}

TEST_CASE("inconclusive rows always land on the test side") {
    Dataset data = synth_classification(SynthScenario::ded_like, 90, 13);
    for (bool stratified : {true, false}) {
        const SplitResult result = split(data, 0.2, 17, stratified);
        CHECK(label_counts(result.train)[2] == 0);
        CHECK(label_counts(result.test)[2] == 9);
    }
}

TEST_CASE("split is deterministic given the seed") {
    Dataset data = synth_classification(SynthScenario::lpbf_like, 60, 19);
    const SplitResult a = split(data, 0.25, 23, true);
    const SplitResult b = split(data, 0.25, 23, true);
    CHECK(a.train.rows == b.train.rows);
    CHECK(a.test.rows == b.test.rows);
    const SplitResult c = split(data, 0.25, 24, true);
    CHECK(a.test.rows != c.test.rows);
}

TEST_CASE("split rejects fractions that empty a side or a class") {
    Dataset data = synth_classification(SynthScenario::lpbf_like, 60, 29);
    CHECK(thrown_code([&] { split(data, 0.0, 1, true); }) == "invalid_parameter");
    CHECK(thrown_code([&] { split(data, 1.0, 1, true); }) == "invalid_parameter");

    // Singleton classes: any allocated test row starves its class.
    Dataset tiny;
    tiny.schema = {{"a", ""}};
    tiny.rows.resize(2, 1);
    tiny.rows << 0, 1;
    tiny.labels = {Label::no_defect, Label::defect};
    CHECK(thrown_code([&] { split(tiny, 0.5, 1, true); }) == "invalid_split");
}

TEST_CASE("generators are deterministic") {
    const Dataset a = synth_generate(SynthShape::unimodal, 100, 2, 31);
    const Dataset b = synth_generate(SynthShape::unimodal, 100, 2, 31);
    CHECK(a.rows == b.rows);
    const Dataset c = synth_generate(SynthShape::unimodal, 100, 2, 32);
    CHECK(a.rows != c.rows);

    const Dataset s1 = synth_classification(SynthScenario::ded_like, 90, 37);
    const Dataset s2 = synth_classification(SynthScenario::ded_like, 90, 37);
    CHECK(s1.rows == s2.rows);
    CHECK(s1.labels == s2.labels);
}

TEST_CASE("unimodal samples have near-zero excess kurtosis") {
    const Dataset data = synth_generate(SynthShape::unimodal, 1000, 1, 41);
    std::vector<double> values(data.rows.col(0).data(), data.rows.col(0).data() + 1000);
    CHECK(std::abs(excess_kurtosis(values)) < 0.5);
}

TEST_CASE("heavy-tailed samples have large excess kurtosis") {
    ShapeParams params;
    params.dof = 3.0;
    const Dataset data = synth_generate(SynthShape::heavy_tailed, 5000, 1, 43, params);
    std::vector<double> values(data.rows.col(0).data(), data.rows.col(0).data() + 5000);
    CHECK(excess_kurtosis(values) > 2.0);
}

TEST_CASE("flattened samples are platykurtic") {
    const Dataset data = synth_generate(SynthShape::flattened, 2000, 1, 47);
    std::vector<double> values(data.rows.col(0).data(), data.rows.col(0).data() + 2000);
    CHECK(excess_kurtosis(values) < -0.3);
}

TEST_CASE("bimodal with zero separation collapses to a single gaussian") {
    ShapeParams params;
    params.separation = 0.0;
    const Dataset data = synth_generate(SynthShape::bimodal, 5000, 1, 53, params);
    std::vector<double> values(data.rows.col(0).data(), data.rows.col(0).data() + 5000);
    CHECK(ks_to_fitted_gaussian(values) < 0.02);
}

TEST_CASE("bimodal with default separation is far from a single gaussian") {
    const Dataset data = synth_generate(SynthShape::bimodal, 1000, 1, 59);
    std::vector<double> values(data.rows.col(0).data(), data.rows.col(0).data() + 1000);
    CHECK(ks_to_fitted_gaussian(values) > 0.08);
}

TEST_CASE("generator parameter validation") {
    CHECK(thrown_code([] { synth_generate(SynthShape::unimodal, 0, 1, 1); }) ==
          "invalid_parameter");
    ShapeParams bad_dof;
    bad_dof.dof = 0.0;
    CHECK(thrown_code([&] { synth_generate(SynthShape::heavy_tailed, 10, 1, 1, bad_dof); }) ==
          "invalid_parameter");
    ShapeParams bad_exp;
    bad_exp.shape_exponent = 2.0;
    CHECK(thrown_code([&] { synth_generate(SynthShape::flattened, 10, 1, 1, bad_exp); }) ==
          "invalid_parameter");
    CHECK(thrown_code([] { synth_classification(SynthScenario::ded_like, 10, 1); }) ==
          "invalid_parameter");
}

TEST_CASE("scenario label counts match the documented balances") {
    const Dataset ded = synth_classification(SynthScenario::ded_like, 90, 61);
    const auto ded_counts = label_counts(ded);
    CHECK(ded_counts[0] == 45);
    CHECK(ded_counts[1] == 36);
    CHECK(ded_counts[2] == 9);
    CHECK(ded.schema.size() == 6);
    CHECK(ded.schema[1].name == "scan_speed");

    const Dataset lpbf = synth_classification(SynthScenario::lpbf_like, 60, 67);
    const auto lpbf_counts = label_counts(lpbf);
    CHECK(lpbf_counts[0] == 31);
    CHECK(lpbf_counts[1] == 29);
    CHECK(lpbf_counts[2] == 0);

    const Dataset ded500 = synth_classification(SynthScenario::ded_like, 500, 71);
    const auto c500 = label_counts(ded500);
    CHECK(c500[0] == 250);
    CHECK(c500[1] == 200);
    CHECK(c500[2] == 50);
}

TEST_CASE("ded scan speed is detectably bimodal while the energy surrogate is not") {
    const Dataset data = synth_classification(SynthScenario::ded_like, 500, 73);
    const Eigen::Index speed = data.column_index("scan_speed");
    const Eigen::Index power = data.column_index("laser_power");
    std::vector<double> speeds, energies;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        speeds.push_back(data.rows(i, speed));
        energies.push_back(
            energy_feature(data.rows(i, power), data.rows(i, speed), kDedNominalSpecificHeat));
    }
    const UnimodalityGain gain = unimodality_gain(speeds, energies);
    CHECK(gain.ks_raw > 0.08);
    CHECK(gain.ks_energy < gain.ks_raw);
}

TEST_CASE("generator output survives a csv round trip bit for bit") {
    TempDir tmp;
    const Dataset data = synth_classification(SynthScenario::ded_like, 90, 79);
    save_csv(data, tmp.file("ded.csv"));
    const Dataset loaded = load_csv(tmp.file("ded.csv"), schema_preset(SchemaPresetKind::ded),
                                    "label", default_label_mapping(), true);
    CHECK(loaded.rows == data.rows);
    CHECK(loaded.labels == data.labels);

    // Saving the loaded dataset reproduces the file byte for byte.
    save_csv(loaded, tmp.file("ded2.csv"));
    CHECK(read_file(tmp.file("ded.csv")) == read_file(tmp.file("ded2.csv")));
}

TEST_CASE("unlabeled shape datasets write no label column") {
    TempDir tmp;
    const Dataset data = synth_generate(SynthShape::bimodal, 25, 2, 83);
    save_csv(data, tmp.file("shape.csv"));
    const std::string content = read_file(tmp.file("shape.csv"));
    CHECK(content.substr(0, content.find('\n')) == "x1,x2");
}
