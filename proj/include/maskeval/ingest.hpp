#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maskeval/mask.hpp"

namespace maskeval {

// Ordered class names with index 0 reserved for "background"; real classes
// occupy 1..K.
class ClassTable {
public:
    ClassTable();
    explicit ClassTable(std::vector<std::string> real_classes);

    // The 12-class road-object taxonomy used as the default everywhere.
    static const ClassTable& road_defaults();

    int num_classes() const { return static_cast<int>(names_.size()) - 1; } // K
    int size_with_background() const { return static_cast<int>(names_.size()); }
    const std::string& name(int index) const;
    std::optional<int> index_of(std::string_view name) const;
    std::vector<std::string> real_names() const;
    bool operator==(const ClassTable&) const = default;

private:
    std::vector<std::string> names_; // [0] == "background"
};

struct GtInstance {
    int class_index = 0; // >= 1
    std::optional<Polygon> polygon;
    std::optional<RleMask> rle;
    BoundingBox box; // tight bounds of the geometry (within 0.5 px when supplied)
};

struct GtImage {
    std::string id;
    std::vector<GtInstance> instances;
};

struct GroundTruthDoc {
    ImageDims dims;
    ClassTable classes;
    std::vector<GtImage> images;
};

struct PredDetection {
    int class_index = 0; // >= 1, never background
    double score = 0;
    BoundingBox box;
    std::optional<MaskGrid> grid;
    std::optional<RleMask> rle;
};

struct PredImage {
    std::string id;
    std::vector<PredDetection> detections;
};

struct PredictionDoc {
    std::vector<PredImage> images;
};

GroundTruthDoc parse_ground_truth(const std::string& json_text);
std::string serialize_ground_truth(const GroundTruthDoc& doc);
PredictionDoc parse_predictions(const std::string& json_text);
std::string serialize_predictions(const PredictionDoc& doc);

GroundTruthDoc load_ground_truth(const std::filesystem::path& path);
PredictionDoc load_predictions(const std::filesystem::path& path);

// VoTT-style export -> ground-truth document at `target` resolution. Accepts
// an "assets" object or array, or a single {asset, regions} record; unknown
// fields are ignored. Region geometry is rescaled per axis from the asset's
// source size. Throws parse_error on missing source dims or unmappable tags.
GroundTruthDoc convert_vott(const std::string& vott_json, ImageDims target,
                            const ClassTable& classes = ClassTable::road_defaults());

// Instance counts per class and split.
struct DatasetSummary {
    static constexpr std::array<std::string_view, 3> kSplits{"training", "validation", "testing"};
    ClassTable classes;
    std::vector<std::array<long, 3>> counts; // one row per real class

    std::array<long, 3> split_totals() const;
    long class_total(int real_class_row) const;
    long grand_total() const;
};

// Any split pointer may be null (counts as empty). Documents must share one
// class table.
DatasetSummary validate_dataset(const GroundTruthDoc* training, const GroundTruthDoc* validation,
                                const GroundTruthDoc* testing);

// Compares a summary against an expected-summary JSON document; returns one
// human-readable line per mismatch (empty means match). Only keys present in
// the expected document are checked.
std::vector<std::string> diff_summary(const DatasetSummary& summary, const std::string& expected_json);

} // namespace maskeval
