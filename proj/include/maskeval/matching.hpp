#pragma once

#include <optional>
#include <utility>

#include "maskeval/ingest.hpp"

namespace maskeval {

enum class IouKind { box, mask };
const char* to_string(IouKind kind);

// Joined view over one ground-truth and one prediction document. Image order
// is the GT file order followed by prediction-only images.
struct EvalInput {
    const GroundTruthDoc* gt = nullptr;
    const PredictionDoc* pred = nullptr;

    struct ImageRef {
        std::string id;
        int gt_image = -1;   // index into gt->images, -1 if absent
        int pred_image = -1; // index into pred->images, -1 if absent
    };
    std::vector<ImageRef> images;

    const ClassTable& classes() const { return gt->classes; }
    ImageDims dims() const { return gt->dims; }
    const GtInstance* gt_instance(int image, int gt_index) const;
    const PredDetection* detection(int image, int det_index) const;
    int num_gts(int image) const;
    int num_dets(int image) const;
};

EvalInput build_eval_input(const GroundTruthDoc& gt, const PredictionDoc& pred);

// GT geometry as a bitmap (rle preferred over polygon when both exist).
BinaryMask materialize_gt_mask(const GtInstance& inst, const ImageDims& dims);

// Detection mask: decoded rle, or the grid extrapolated over the detection
// box clipped to the frame. nullopt when the detection carries neither.
std::optional<BinaryMask> materialize_det_mask(const PredDetection& det, const ImageDims& dims,
                                               double binarize);

// Pairwise det x gt IoUs per image. Box kind fills every pair (the confusion
// matrix needs cross-class overlaps); mask kind fills same-class pairs only.
struct IouTables {
    IouKind kind = IouKind::box;
    double binarize = 0.5;

    struct ImageTable {
        int n_dets = 0;
        int n_gts = 0;
        std::vector<double> iou;        // det-major, n_dets * n_gts
        std::vector<char> det_has_mask; // mask kind only
        double at(int det, int gt) const { return iou[static_cast<size_t>(det) * n_gts + gt]; }
    };
    std::vector<ImageTable> images;
};

IouTables compute_ious(const EvalInput& input, IouKind kind, double binarize = 0.5, int threads = 1);

struct MatchParams {
    double iou_threshold = 0.5;
    int max_detections = 300; // per-image cap across all classes
    double min_score = 0.0;   // detections below are not considered at all
};

struct MatchEntry {
    int image = -1;
    int det = -1;
    int class_index = 0;
    double score = 0;
    int gt = -1;      // matched GT index within the image, -1 when unmatched
    double iou = 0;   // matched IoU, or the best candidate IoU for an FP
    bool tp = false;
};

struct MatchResult {
    IouKind kind = IouKind::box;
    MatchParams params;
    // Entries per class index (slot 0 unused), each sorted by score descending
    // with ties broken by (image order, detection order).
    std::vector<std::vector<MatchEntry>> per_class;
    std::vector<long> gt_count;                      // per class index
    std::vector<std::pair<int, int>> unmatched_gts;  // (image, gt index)
    std::vector<std::pair<int, int>> missing_mask;   // considered dets lacking any mask
    long considered = 0;

    long tp(int class_index) const;
    long fp(int class_index) const;
    long fn(int class_index) const;
    const MatchEntry* find(int image, int det) const;
};

// Greedy confidence-ordered assignment: per image, detections sorted by score
// descending (stable on ties), truncated to max_detections, each matched to
// the same-class unmatched GT with highest IoU; TP iff that IoU reaches the
// threshold. In mask kind a detection without any mask is counted FP and
// recorded in missing_mask.
MatchResult match_detections(const EvalInput& input, const IouTables& tables, const MatchParams& params);

// (K+1) x (K+1) counts; row = true class, column = predicted class, slot 0 is
// background on both axes. Built from class-agnostic greedy matching on box
// IoU: matched pairs land at [gt_class][det_class], unmatched detections at
// [background][det_class], unmatched GTs at [gt_class][background].
struct ConfusionMatrix {
    int size = 0; // K + 1
    std::vector<long> cells;
    long at(int true_class, int pred_class) const {
        return cells[static_cast<size_t>(true_class) * size + pred_class];
    }
    long& at(int true_class, int pred_class) {
        return cells[static_cast<size_t>(true_class) * size + pred_class];
    }
};

ConfusionMatrix confusion_matrix(const EvalInput& input, const IouTables& box_tables,
                                 const MatchParams& params);

} // namespace maskeval
