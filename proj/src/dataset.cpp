#include "amgmm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "amgmm/error.hpp"
#include "amgmm/numeric.hpp"
#include "amgmm/rng.hpp"

namespace amgmm {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// One CSV record; supports RFC-style quoting with doubled quotes.
std::vector<std::string> parse_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && trim(field).empty()) {
            quoted = true;
            field.clear();
        } else if (c == ',') {
            fields.push_back(trim(field));
            field.clear();
        } else {
            field += c;
        }
        ++i;
    }
    require(!quoted, "csv_format", "unterminated quote on line " + std::to_string(line_no));
    fields.push_back(trim(field));
    return fields;
}

std::string csv_escape(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io_error", "cannot open file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string content = buffer.str();
    // Strip a UTF-8 BOM if present.
    if (content.size() >= 3 && content.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        content.erase(0, 3);
    }
    std::vector<std::string> lines;
    std::string line;
    std::istringstream stream(content);
    while (std::getline(stream, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

Dataset take_rows(const Dataset& source, const std::vector<Eigen::Index>& indices,
                  const char* side) {
    Dataset out;
    out.schema = source.schema;
    out.provenance = source.provenance + "|split:" + side;
    out.rows.resize(static_cast<Eigen::Index>(indices.size()), source.dim());
    out.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out.rows.row(static_cast<Eigen::Index>(i)) = source.rows.row(indices[i]);
        out.labels.push_back(source.labels[static_cast<std::size_t>(indices[i])]);
    }
    return out;
}

} // namespace

const char* label_name(Label label) {
    switch (label) {
        case Label::no_defect: return "no_defect";
        case Label::defect: return "defect";
        case Label::inconclusive: return "inconclusive";
        case Label::unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

bool Dataset::has_labels() const {
    return std::any_of(labels.begin(), labels.end(),
                       [](Label l) { return l != Label::unlabeled; });
}

std::vector<std::string> Dataset::column_names() const {
    std::vector<std::string> names;
    names.reserve(schema.size());
    for (const auto& c : schema) names.push_back(c.name);
    return names;
}

Eigen::Index Dataset::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (schema[i].name == name) return static_cast<Eigen::Index>(i);
    }
    return -1;
}

SchemaPresetKind schema_preset_from_name(std::string_view name) {
    if (name == "lpbf") return SchemaPresetKind::lpbf;
    if (name == "ded") return SchemaPresetKind::ded;
    if (name == "custom") return SchemaPresetKind::custom;
    fail("invalid_parameter", "unknown schema preset: '" + std::string(name) + "'");
}

const char* schema_preset_name(SchemaPresetKind kind) {
    switch (kind) {
        case SchemaPresetKind::lpbf: return "lpbf";
        case SchemaPresetKind::ded: return "ded";
        case SchemaPresetKind::custom: return "custom";
    }
    return "custom";
}

std::vector<Column> schema_preset(SchemaPresetKind kind) {
    switch (kind) {
        case SchemaPresetKind::lpbf:
            return {{"laser_power", "W"},       {"scan_speed", "mm/s"},
                    {"powder_size", "um"},      {"beam_diameter", "mm"},
                    {"layer_thickness", "mm"},  {"thermal_diffusivity", "m^2/s"}};
        case SchemaPresetKind::ded:
            return {{"laser_power", "W"},   {"scan_speed", "mm/s"}, {"powder_flow", "rpm"},
                    {"powder_gas", "lpm"},  {"track_length", "mm"}, {"track_height", "mm"}};
        case SchemaPresetKind::custom:
            return {};
    }
    return {};
}

LabelMapping default_label_mapping() {
    return {{"no_defect", Label::no_defect},
            {"defect", Label::defect},
            {"inconclusive", Label::inconclusive}};
}

Dataset load_csv(const std::filesystem::path& path, const std::vector<Column>& schema,
                 const std::string& label_column, const LabelMapping& mapping,
                 bool require_label_column) {
    const std::vector<std::string> lines = read_lines(path);
    require(!lines.empty(), "empty_dataset", "empty file: " + path.string());

    const std::vector<std::string> header = parse_csv_line(lines[0], 1);
    {
        std::set<std::string> seen;
        for (const auto& h : header) {
            require(seen.insert(h).second, "csv_format",
                    "duplicate header column '" + h + "' in " + path.string());
        }
    }

    Eigen::Index label_idx = -1;
    if (!label_column.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (header[j] == label_column) label_idx = static_cast<Eigen::Index>(j);
        }
        require(label_idx >= 0 || !require_label_column, "schema_mismatch",
                "label column '" + label_column + "' not found in " + path.string());
    }

    // Feature columns: preset schemas are matched by name in any order;
    // custom takes every non-label column in file order.
    Dataset dataset;
    std::vector<Eigen::Index> feature_idx;
    if (schema.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (static_cast<Eigen::Index>(j) == label_idx) continue;
            dataset.schema.push_back({header[j], ""});
            feature_idx.push_back(static_cast<Eigen::Index>(j));
        }
        require(!dataset.schema.empty(), "schema_mismatch",
                "no feature columns in " + path.string());
    } else {
        for (const Column& col : schema) {
            Eigen::Index found = -1;
            for (std::size_t j = 0; j < header.size(); ++j) {
                if (header[j] == col.name) found = static_cast<Eigen::Index>(j);
            }
            require(found >= 0, "schema_mismatch",
                    "missing required column '" + col.name + "' in " + path.string());
            dataset.schema.push_back(col);
            feature_idx.push_back(found);
        }
    }

    const std::size_t n_rows = lines.size() - 1;
    require(n_rows >= 1, "empty_dataset", "no data rows in " + path.string());

    dataset.rows.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(feature_idx.size()));
    dataset.labels.assign(n_rows, Label::unlabeled);
    std::set<std::string> unmapped;
    for (std::size_t i = 0; i < n_rows; ++i) {
        const std::vector<std::string> fields = parse_csv_line(lines[i + 1], i + 2);
        require(fields.size() == header.size(), "csv_format",
                "row " + std::to_string(i + 1) + " has " + std::to_string(fields.size()) +
                    " fields, expected " + std::to_string(header.size()));
        for (std::size_t k = 0; k < feature_idx.size(); ++k) {
            const std::string& cell = fields[static_cast<std::size_t>(feature_idx[k])];
            double value = 0.0;
            try {
                value = parse_double(cell);
            } catch (const Error&) {
                fail("csv_format", "row " + std::to_string(i + 1) + ", column '" +
                                       dataset.schema[k].name + "': not a finite number: '" +
                                       cell + "'");
            }
            dataset.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = value;
        }
        if (label_idx >= 0) {
            const std::string& raw = fields[static_cast<std::size_t>(label_idx)];
            if (raw.empty()) continue; // unlabeled
            auto it = mapping.find(raw);
            if (it == mapping.end()) {
                unmapped.insert(raw);
            } else {
                dataset.labels[i] = it->second;
            }
        }
    }
    if (!unmapped.empty()) {
        std::string list;
        for (const auto& s : unmapped) {
            if (!list.empty()) list += ", ";
            list += "'" + s + "'";
        }
        fail("unknown_label", "unmapped label values: " + list);
    }

    dataset.provenance = path.string();
    return dataset;
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path,
              const std::string& label_column) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io_error", "cannot write file: " + path.string());

    const bool labeled = dataset.has_labels();
    std::string line;
    for (std::size_t j = 0; j < dataset.schema.size(); ++j) {
        if (j) line += ",";
        line += csv_escape(dataset.schema[j].name);
    }
    if (labeled) line += "," + csv_escape(label_column);
    out << line << "\n";

    for (Eigen::Index i = 0; i < dataset.n(); ++i) {
        line.clear();
        for (Eigen::Index j = 0; j < dataset.dim(); ++j) {
            if (j) line += ",";
            line += format_double(dataset.rows(i, j));
        }
        if (labeled) {
            line += ",";
            const Label l = dataset.labels[static_cast<std::size_t>(i)];
            if (l != Label::unlabeled) line += label_name(l);
        }
        out << line << "\n";
    }
    require(out.good(), "io_error", "write failed: " + path.string());
}

SplitResult split(const Dataset& dataset, double test_fraction, std::uint64_t seed,
                  bool stratified) {
    require(test_fraction > 0.0 && test_fraction < 1.0, "invalid_parameter",
            "test fraction must be in (0, 1)");
    const Eigen::Index n = dataset.n();
    require(n >= 2, "invalid_split", "need at least 2 rows to split");

    std::vector<Eigen::Index> pool;       // everything that may train
    std::vector<Eigen::Index> inconclusive;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (dataset.labels[static_cast<std::size_t>(i)] == Label::inconclusive) {
            inconclusive.push_back(i);
        } else {
            pool.push_back(i);
        }
    }
    require(!pool.empty(), "invalid_split", "no trainable rows to split");

    const std::size_t test_total =
        static_cast<std::size_t>(std::floor(static_cast<double>(pool.size()) * test_fraction));
    require(pool.size() - test_total >= 1, "invalid_split", "split leaves the training side empty");
    require(test_total + inconclusive.size() >= 1, "invalid_split",
            "split leaves the test side empty");

    std::vector<Eigen::Index> test_indices = inconclusive;
    if (stratified) {
        // Group the pool by label, preserving source order within groups.
        std::vector<Label> group_labels;
        std::vector<std::vector<Eigen::Index>> groups;
        for (Eigen::Index i : pool) {
            const Label l = dataset.labels[static_cast<std::size_t>(i)];
            std::size_t g = 0;
            for (; g < group_labels.size(); ++g) {
                if (group_labels[g] == l) break;
            }
            if (g == group_labels.size()) {
                group_labels.push_back(l);
                groups.emplace_back();
            }
            groups[g].push_back(i);
        }
        for (std::size_t g = 0; g < groups.size(); ++g) {
            Rng rng = Rng::stream(seed, "split", g);
            rng.shuffle(groups[g]);
        }

        // Largest-remainder apportionment of the global test count.
        std::vector<std::size_t> alloc(groups.size(), 0);
        std::vector<double> remainder(groups.size(), 0.0);
        std::size_t assigned = 0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const double share = static_cast<double>(test_total) *
                                 static_cast<double>(groups[g].size()) /
                                 static_cast<double>(pool.size());
            alloc[g] = static_cast<std::size_t>(std::floor(share));
            remainder[g] = share - static_cast<double>(alloc[g]);
            assigned += alloc[g];
        }
        while (assigned < test_total) {
            std::size_t best = groups.size();
            for (std::size_t g = 0; g < groups.size(); ++g) {
                if (alloc[g] >= groups[g].size()) continue;
                if (best == groups.size() || remainder[g] > remainder[best]) best = g;
            }
            require(best < groups.size(), "invalid_split", "cannot allocate test rows");
            ++alloc[best];
            remainder[best] = -1.0;
            ++assigned;
        }

        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (group_labels[g] != Label::unlabeled && groups[g].size() - alloc[g] < 1) {
                fail("invalid_split", std::string("class '") + label_name(group_labels[g]) +
                                          "' would have no training rows");
            }
            test_indices.insert(test_indices.end(), groups[g].begin(),
                                groups[g].begin() + static_cast<std::ptrdiff_t>(alloc[g]));
        }
    } else {
        std::vector<Eigen::Index> shuffled = pool;
        Rng rng = Rng::stream(seed, "split", 0);
        rng.shuffle(shuffled);
        test_indices.insert(test_indices.end(), shuffled.begin(),
                            shuffled.begin() + static_cast<std::ptrdiff_t>(test_total));
    }

    std::sort(test_indices.begin(), test_indices.end());
    std::vector<char> in_test(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i : test_indices) in_test[static_cast<std::size_t>(i)] = 1;
    std::vector<Eigen::Index> train_indices;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!in_test[static_cast<std::size_t>(i)]) train_indices.push_back(i);
    }

    return {take_rows(dataset, train_indices, "train"), take_rows(dataset, test_indices, "test")};
}

} // namespace amgmm
