#pragma once

#include "maskeval/matching.hpp"

namespace maskeval {

// p = tp/(tp+fp), r = tp/(tp+fn); a 0/0 quotient yields nullopt.
std::pair<std::optional<double>, std::optional<double>> precision_recall(long tp, long fp, long fn);

// Harmonic mean 2pr/(p+r); nullopt when either input is undefined or p+r == 0.
// Reports render undefined values as "-".
std::optional<double> f1_score(std::optional<double> precision, std::optional<double> recall);

// 101-point interpolated average precision over a ranked TP/FP sequence:
// cumulative precision/recall, right-to-left precision envelope, sampled at
// recalls {0.00, 0.01, ..., 1.00}. Classes without ground truth are excluded
// (nullopt).
std::optional<double> average_precision(const std::vector<char>& ranked_tp, long total_gt);

struct ClassMetrics {
    int class_index = 0;
    long support = 0; // #GT
    long tp = 0, fp = 0, fn = 0;
    std::optional<double> precision, recall, f1;
    std::optional<double> ap; // ranked AP at the operating IoU, all detections
    bool max_precision = false, max_recall = false, max_f1 = false;
};

struct SummaryMetrics {
    std::optional<double> map;   // mean AP over IoU 0.50:0.05:0.95
    std::optional<double> ap50, ap75;
    std::optional<double> ar_at_1, ar_at_10, ar_at_100;
};

struct PrCurve {
    int class_index = 0;
    double iou_threshold = 0;
    std::vector<double> recall;
    std::vector<double> precision;
};

struct EvalOptions {
    double iou_threshold = 0.5;  // operating point for tables and diagnostics
    double score_threshold = 0.5;
    int max_detections = 300;
    double mask_binarize = 0.5;
    int threads = 1;
};

struct KindEvaluation {
    IouKind kind = IouKind::box;
    SummaryMetrics summary;
    std::vector<ClassMetrics> per_class; // one row per real class
    std::vector<PrCurve> curves;         // 10 thresholds x classes with GT
    long missing_mask_detections = 0;
};

// Ranked TP flags for one class, merged across images in score order.
std::vector<char> ranked_tp_flags(const MatchResult& match, int class_index);

// Count-based per-class table from an operating-point match (score-filtered),
// with the ranked AP column supplied separately. Sets the per-column max
// flags used by report rendering.
std::vector<ClassMetrics> per_class_table(const MatchResult& operating,
                                          const std::vector<std::optional<double>>& ap_per_class);

// Full COCO-style sweep for one IoU kind: AP at thresholds 0.50:0.05:0.95,
// AR@{1,10,100}, the operating-point class table, and plot-ready PR curves.
KindEvaluation evaluate_kind(const EvalInput& input, IouKind kind, const EvalOptions& opts);

} // namespace maskeval
