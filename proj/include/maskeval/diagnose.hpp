#pragma once

#include "maskeval/metrics.hpp"

namespace maskeval {

enum class FailureMode { NoDivergence, PartialMask, LowMaskIoU, LocationMismatch, OversizedMask };
const char* to_string(FailureMode mode);

// One record per box-true-positive detection: the box IoU against its matched
// GT paired with mask-quality measurements against that same GT.
struct DivergenceRecord {
    std::string image_id;
    int image = -1;
    int det = -1;
    int gt = -1;
    int class_index = 0;
    double score = 0;
    BoundingBox det_box, gt_box;
    double box_iou = 0;
    double mask_iou = 0;
    double gt_mask_coverage = 0; // |pred AND gt| / |gt|
    double pred_excess = 0;      // |pred| / |gt|
    double centroid_offset = 0;  // centroid distance over the GT box diagonal; 0 for empty masks
    FailureMode mode = FailureMode::NoDivergence;
};

struct DiagnoseParams {
    double mask_iou_threshold = 0.5; // below this the mask counts as diverged
    double oversize_ratio = 1.5;
    double offset_frac = 0.25;
    double coverage_frac = 0.5;
    double mask_binarize = 0.5;
};

// Decision ladder, first match wins:
//   1. mask_iou >= mask_iou_threshold            -> NoDivergence
//   2. pred_excess > oversize_ratio and
//      gt_mask_coverage >= coverage_frac         -> OversizedMask
//   3. centroid_offset > offset_frac             -> LocationMismatch
//   4. gt_mask_coverage < coverage_frac          -> PartialMask
//   5. otherwise                                 -> LowMaskIoU
FailureMode classify_failure(const DivergenceRecord& record, const DiagnoseParams& params = {});

// Builds one classified record per box-TP in box_matches. mask_matches must
// come from the same input at the same params (consistency check only; mask
// quantities are measured directly against the box-matched GT).
std::vector<DivergenceRecord> pairwise_divergence(const EvalInput& input, const MatchResult& box_matches,
                                                  const MatchResult& mask_matches,
                                                  const DiagnoseParams& params = {});

struct F1Gap {
    int class_index = 0;
    std::optional<double> f1_box, f1_mask, gap;
    bool flagged = false;
};

// Per-class F1 gap (box minus mask). Undefined F1 propagates to an undefined
// gap; a class is flagged when the gap exceeds flag_threshold, or when its box
// F1 exceeds the threshold while the mask F1 is undefined (no mask ever
// matched). Throws when the tables cover different class sets.
std::vector<F1Gap> f1_gap_report(const std::vector<ClassMetrics>& box_table,
                                 const std::vector<ClassMetrics>& mask_table,
                                 double flag_threshold = 0.10);

struct ClassShapeStat {
    int class_index = 0;
    long instances = 0;
    double mean_elongation = 0;
    std::optional<double> gap;
};

struct ShapeCorrelation {
    double spearman_rho = 0;
    bool tie_flag = false; // rho reported as 0 because one variable had no rank spread
    std::vector<ClassShapeStat> per_class;
};

// Spearman rank correlation between per-class mean GT elongation and the F1
// gap, over classes with a defined gap and at least one GT instance. Throws
// eval_error when fewer than 3 classes qualify.
ShapeCorrelation shape_correlation(const EvalInput& input, const std::vector<F1Gap>& gaps);

} // namespace maskeval
