#include "maskeval/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace maskeval {

std::pair<std::optional<double>, std::optional<double>> precision_recall(long tp, long fp, long fn) {
    std::optional<double> p, r;
    if (tp + fp > 0) p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) r = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return {p, r};
}

std::optional<double> f1_score(std::optional<double> precision, std::optional<double> recall) {
    if (!precision || !recall) return std::nullopt;
    const double p = *precision, r = *recall;
    if (p + r == 0.0) return std::nullopt;
    return 2.0 * p * r / (p + r);
}

std::optional<double> average_precision(const std::vector<char>& ranked_tp, long total_gt) {
    if (total_gt == 0) return std::nullopt; // excluded from means
    const size_t n = ranked_tp.size();
    std::vector<double> prec(n), rec(n);
    long tp = 0, fp = 0;
    for (size_t i = 0; i < n; ++i) {
        ranked_tp[i] ? ++tp : ++fp;
        prec[i] = static_cast<double>(tp) / static_cast<double>(tp + fp);
        rec[i] = static_cast<double>(tp) / static_cast<double>(total_gt);
    }
    for (size_t i = n; i-- > 1;) {
        prec[i - 1] = std::max(prec[i - 1], prec[i]);
    }
    double sum = 0;
    size_t cursor = 0;
    for (int k = 0; k <= 100; ++k) {
        const double r = k / 100.0;
        while (cursor < n && rec[cursor] < r) ++cursor;
        if (cursor < n) sum += prec[cursor];
    }
    return sum / 101.0;
}

std::vector<char> ranked_tp_flags(const MatchResult& match, int class_index) {
    const auto& entries = match.per_class[class_index];
    std::vector<char> flags;
    flags.reserve(entries.size());
    for (const auto& e : entries) flags.push_back(e.tp ? 1 : 0);
    return flags;
}

std::vector<ClassMetrics> per_class_table(const MatchResult& operating,
                                          const std::vector<std::optional<double>>& ap_per_class) {
    const int k = static_cast<int>(operating.per_class.size()) - 1;
    std::vector<ClassMetrics> table;
    table.reserve(static_cast<size_t>(k));
    for (int c = 1; c <= k; ++c) {
        ClassMetrics row;
        row.class_index = c;
        row.support = operating.gt_count[c];
        row.tp = operating.tp(c);
        row.fp = operating.fp(c);
        row.fn = operating.fn(c);
        std::tie(row.precision, row.recall) = precision_recall(row.tp, row.fp, row.fn);
        row.f1 = f1_score(row.precision, row.recall);
        if (c - 1 < static_cast<int>(ap_per_class.size())) row.ap = ap_per_class[c - 1];
        table.push_back(row);
    }

    auto flag_max = [&](auto member, auto flag) {
        double best = -1;
        for (const auto& row : table) {
            if ((row.*member).has_value() && *(row.*member) > best) best = *(row.*member);
        }
        if (best < 0) return;
        for (auto& row : table) {
            if ((row.*member).has_value() && *(row.*member) == best) row.*flag = true;
        }
    };
    flag_max(&ClassMetrics::precision, &ClassMetrics::max_precision);
    flag_max(&ClassMetrics::recall, &ClassMetrics::max_recall);
    flag_max(&ClassMetrics::f1, &ClassMetrics::max_f1);
    return table;
}

namespace {

constexpr int kNumThresholds = 10;

double coco_threshold(int i) {
    return (50 + 5 * i) / 100.0; // 0.50, 0.55, ..., 0.95
}

std::optional<double> mean_of_defined(const std::vector<std::optional<double>>& values) {
    double sum = 0;
    int n = 0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

} // namespace

KindEvaluation evaluate_kind(const EvalInput& input, IouKind kind, const EvalOptions& opts) {
    KindEvaluation out;
    out.kind = kind;
    const int k = input.classes().num_classes();
    const IouTables tables = compute_ious(input, kind, opts.mask_binarize, opts.threads);

    // AP across IoU thresholds at the full detection cap, no score filter.
    std::vector<std::vector<std::optional<double>>> ap(kNumThresholds); // [threshold][class-1]
    for (int t = 0; t < kNumThresholds; ++t) {
        MatchParams params;
        params.iou_threshold = coco_threshold(t);
        params.max_detections = opts.max_detections;
        const MatchResult match = match_detections(input, tables, params);
        out.missing_mask_detections =
            std::max(out.missing_mask_detections, static_cast<long>(match.missing_mask.size()));
        ap[t].resize(static_cast<size_t>(k));
        for (int c = 1; c <= k; ++c) {
            ap[t][c - 1] = average_precision(ranked_tp_flags(match, c), match.gt_count[c]);
            if (match.gt_count[c] > 0) {
                PrCurve curve;
                curve.class_index = c;
                curve.iou_threshold = params.iou_threshold;
                long tp = 0, fptotal = 0;
                for (const auto& e : match.per_class[c]) {
                    e.tp ? ++tp : ++fptotal;
                    curve.recall.push_back(static_cast<double>(tp) / match.gt_count[c]);
                    curve.precision.push_back(static_cast<double>(tp) / (tp + fptotal));
                }
                out.curves.push_back(std::move(curve));
            }
        }
    }

    std::vector<std::optional<double>> per_threshold_map(kNumThresholds);
    for (int t = 0; t < kNumThresholds; ++t) per_threshold_map[t] = mean_of_defined(ap[t]);
    out.summary.map = mean_of_defined(per_threshold_map);
    out.summary.ap50 = per_threshold_map[0];
    out.summary.ap75 = per_threshold_map[5];

    // AR@k: recall with at most k highest-score detections per image, averaged
    // over classes with GT and over the 10 thresholds.
    const int caps[3] = {1, 10, 100};
    std::optional<double>* slots[3] = {&out.summary.ar_at_1, &out.summary.ar_at_10,
                                       &out.summary.ar_at_100};
    for (int ci = 0; ci < 3; ++ci) {
        std::vector<std::optional<double>> per_threshold(kNumThresholds);
        for (int t = 0; t < kNumThresholds; ++t) {
            MatchParams params;
            params.iou_threshold = coco_threshold(t);
            params.max_detections = caps[ci];
            const MatchResult match = match_detections(input, tables, params);
            std::vector<std::optional<double>> recalls(static_cast<size_t>(k));
            for (int c = 1; c <= k; ++c) {
                if (match.gt_count[c] > 0) {
                    recalls[c - 1] = static_cast<double>(match.tp(c)) / match.gt_count[c];
                }
            }
            per_threshold[t] = mean_of_defined(recalls);
        }
        *slots[ci] = mean_of_defined(per_threshold);
    }

    // Operating-point table: score-filtered counts at the configured IoU.
    MatchParams op;
    op.iou_threshold = opts.iou_threshold;
    op.max_detections = opts.max_detections;
    op.min_score = opts.score_threshold;
    const MatchResult operating = match_detections(input, tables, op);

    MatchParams ranked = op;
    ranked.min_score = 0.0;
    const MatchResult full = match_detections(input, tables, ranked);
    std::vector<std::optional<double>> ap_at_op(static_cast<size_t>(k));
    for (int c = 1; c <= k; ++c) {
        ap_at_op[c - 1] = average_precision(ranked_tp_flags(full, c), full.gt_count[c]);
    }
    out.per_class = per_class_table(operating, ap_at_op);
    return out;
}

} // namespace maskeval
