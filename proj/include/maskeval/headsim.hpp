#pragma once

#include <cstdint>

#include "maskeval/ingest.hpp"

namespace maskeval {

// One proposal as the two detector heads emit it: a center-form box, K+1 raw
// class scores (background first), and one mask grid per real class.
struct RawProposal {
    double cx = 0, cy = 0, w = 0, h = 0;
    std::vector<double> raw_scores;
    std::vector<MaskGrid> mask_grids;
};

// Softmax over the raw score vector; components sum to 1 and the argmax is
// invariant under adding a constant to every input.
std::vector<double> multiclass_scores(const std::vector<double>& raw_scores);

// Head outputs -> detections: the class is the argmax over real classes of
// the softmax, the score is that component, the box converts to corner form,
// and the chosen class's grid channel rides along. A proposal is dropped only
// when background strictly wins the argmax over all K+1 components; score
// ties between real classes break toward the lowest index.
std::vector<PredDetection> finalize_detections(const std::vector<RawProposal>& proposals,
                                               int num_classes);

enum class Corruption { none, partial, shifted, oversized, noisy };
const char* to_string(Corruption c);
Corruption corruption_from_string(const std::string& name);

struct ScenarioInstance {
    int class_index = 1;
    Polygon polygon;
    double score = 0.9;
    Corruption corruption = Corruption::none;
    // Deterministic center-form box jitter in pixels.
    double jitter_dx = 0, jitter_dy = 0, jitter_dw = 0, jitter_dh = 0;
    // Seeded uniform jitter amplitude as a fraction of box width/height.
    double jitter_frac = 0;
    double partial_frac = 0.6; // fraction of grid mass erased (centered band)
    double shift_frac = 0.35;  // rightward translation as a fraction of box width
    double noise_amp = 0.2;    // per-cell uniform perturbation amplitude
};

struct ScenarioImage {
    std::string id;
    std::vector<ScenarioInstance> instances;
};

struct ScenarioSpec {
    ImageDims dims{960, 540};
    ClassTable classes = ClassTable::road_defaults();
    std::uint64_t seed = 0;
    int grid_side = 33; // 15 for the small-grid model variant
    std::vector<ScenarioImage> images;
};

ScenarioSpec parse_scenario(const std::string& json_text);
ScenarioSpec load_scenario(const std::filesystem::path& path);

// Ready-made fixtures. The planted scenario carries one instance per
// corruption mode plus clean ones; the perfect scenario is one clean
// integer-rectangle instance per image, a fixed point of the evaluation.
ScenarioSpec planted_failure_scenario(std::uint64_t seed = 7);
ScenarioSpec perfect_scenario(std::uint64_t seed = 7);

// Deterministic generation (SplitMix64 seeded from spec.seed, consumed in
// document order): ground truth from the true polygons, predictions with
// jittered boxes and mask grids sampled from the true mask, then corrupted.
std::pair<GroundTruthDoc, PredictionDoc> synth_scenario(const ScenarioSpec& spec);

} // namespace maskeval
