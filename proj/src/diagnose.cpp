#include "maskeval/diagnose.hpp"

#include <algorithm>
#include <cmath>

namespace maskeval {

const char* to_string(FailureMode mode) {
    switch (mode) {
        case FailureMode::NoDivergence: return "NoDivergence";
        case FailureMode::PartialMask: return "PartialMask";
        case FailureMode::LowMaskIoU: return "LowMaskIoU";
        case FailureMode::LocationMismatch: return "LocationMismatch";
        case FailureMode::OversizedMask: return "OversizedMask";
    }
    return "?";
}

FailureMode classify_failure(const DivergenceRecord& record, const DiagnoseParams& params) {
    if (record.mask_iou >= params.mask_iou_threshold) return FailureMode::NoDivergence;
    if (record.pred_excess > params.oversize_ratio && record.gt_mask_coverage >= params.coverage_frac) {
        return FailureMode::OversizedMask;
    }
    if (record.centroid_offset > params.offset_frac) return FailureMode::LocationMismatch;
    if (record.gt_mask_coverage < params.coverage_frac) return FailureMode::PartialMask;
    return FailureMode::LowMaskIoU;
}

std::vector<DivergenceRecord> pairwise_divergence(const EvalInput& input, const MatchResult& box_matches,
                                                  const MatchResult& mask_matches,
                                                  const DiagnoseParams& params) {
    if (box_matches.kind != IouKind::box || mask_matches.kind != IouKind::mask) {
        throw eval_error("pairwise_divergence: need one box and one mask match result");
    }
    if (box_matches.params.iou_threshold != mask_matches.params.iou_threshold ||
        box_matches.params.max_detections != mask_matches.params.max_detections ||
        box_matches.params.min_score != mask_matches.params.min_score) {
        throw eval_error("pairwise_divergence: match results use different evaluation params");
    }

    std::vector<DivergenceRecord> records;
    for (const auto& cls : box_matches.per_class) {
        for (const auto& e : cls) {
            if (!e.tp) continue;
            const auto* det = input.detection(e.image, e.det);
            const auto* gt = input.gt_instance(e.image, e.gt);

            DivergenceRecord rec;
            rec.image_id = input.images[e.image].id;
            rec.image = e.image;
            rec.det = e.det;
            rec.gt = e.gt;
            rec.class_index = e.class_index;
            rec.score = e.score;
            rec.det_box = det->box;
            rec.gt_box = gt->box;
            rec.box_iou = e.iou;

            const BinaryMask gt_mask = materialize_gt_mask(*gt, input.dims());
            const auto det_mask = materialize_det_mask(*det, input.dims(), params.mask_binarize);
            const long gt_area = mask_area(gt_mask);
            const long det_area = det_mask ? mask_area(*det_mask) : 0;

            if (det_mask && gt_area > 0) {
                rec.mask_iou = mask_iou(*det_mask, gt_mask);
                long inter = 0;
                for (size_t i = 0; i < gt_mask.bits().size(); ++i) {
                    inter += gt_mask.bits()[i] & det_mask->bits()[i];
                }
                rec.gt_mask_coverage = static_cast<double>(inter) / static_cast<double>(gt_area);
                rec.pred_excess = static_cast<double>(det_area) / static_cast<double>(gt_area);
                if (det_area > 0) {
                    const Point pc = mask_centroid(*det_mask);
                    const Point gc = mask_centroid(gt_mask);
                    const double diag = gt->box.diagonal();
                    if (diag > 0) {
                        rec.centroid_offset =
                            std::sqrt((pc[0] - gc[0]) * (pc[0] - gc[0]) + (pc[1] - gc[1]) * (pc[1] - gc[1])) /
                            diag;
                    }
                }
            }
            // Empty predicted or GT mask: iou/coverage/excess stay 0 and the
            // offset stays 0, so the ladder lands on PartialMask.
            rec.mode = classify_failure(rec, params);
            records.push_back(std::move(rec));
        }
    }
    std::sort(records.begin(), records.end(), [](const DivergenceRecord& a, const DivergenceRecord& b) {
        if (a.image != b.image) return a.image < b.image;
        return a.det < b.det;
    });
    return records;
}

std::vector<F1Gap> f1_gap_report(const std::vector<ClassMetrics>& box_table,
                                 const std::vector<ClassMetrics>& mask_table, double flag_threshold) {
    if (box_table.size() != mask_table.size()) {
        throw eval_error("f1_gap_report: tables cover different class sets");
    }
    std::vector<F1Gap> gaps;
    gaps.reserve(box_table.size());
    for (size_t i = 0; i < box_table.size(); ++i) {
        if (box_table[i].class_index != mask_table[i].class_index) {
            throw eval_error("f1_gap_report: tables cover different class sets");
        }
        F1Gap g;
        g.class_index = box_table[i].class_index;
        g.f1_box = box_table[i].f1;
        g.f1_mask = mask_table[i].f1;
        if (g.f1_box && g.f1_mask) {
            g.gap = *g.f1_box - *g.f1_mask;
            g.flagged = *g.gap > flag_threshold;
        } else if (g.f1_box && !g.f1_mask) {
            g.flagged = *g.f1_box > flag_threshold;
        }
        gaps.push_back(g);
    }
    return gaps;
}

namespace {

// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> average_ranks(const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

} // namespace

ShapeCorrelation shape_correlation(const EvalInput& input, const std::vector<F1Gap>& gaps) {
    const int k = input.classes().num_classes();

    // Mean GT elongation per class across the whole dataset.
    std::vector<double> elong_sum(static_cast<size_t>(k) + 1, 0.0);
    std::vector<long> elong_n(static_cast<size_t>(k) + 1, 0);
    for (size_t image = 0; image < input.images.size(); ++image) {
        const int n_gts = input.num_gts(static_cast<int>(image));
        for (int g = 0; g < n_gts; ++g) {
            const auto* inst = input.gt_instance(static_cast<int>(image), g);
            const BinaryMask m = materialize_gt_mask(*inst, input.dims());
            if (mask_area(m) == 0) continue;
            elong_sum[inst->class_index] += elongation(m);
            elong_n[inst->class_index] += 1;
        }
    }

    ShapeCorrelation out;
    std::vector<double> xs, ys;
    for (const auto& gap : gaps) {
        ClassShapeStat stat;
        stat.class_index = gap.class_index;
        stat.instances = elong_n[gap.class_index];
        stat.mean_elongation =
            stat.instances > 0 ? elong_sum[gap.class_index] / stat.instances : 0.0;
        stat.gap = gap.gap;
        out.per_class.push_back(stat);
        if (gap.gap && stat.instances > 0) {
            xs.push_back(stat.mean_elongation);
            ys.push_back(*gap.gap);
        }
    }
    if (xs.size() < 3) {
        throw eval_error("shape_correlation: fewer than 3 classes with a defined gap");
    }

    const std::vector<double> rx = average_ranks(xs);
    const std::vector<double> ry = average_ranks(ys);
    const size_t n = rx.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0) {
        out.spearman_rho = 0;
        out.tie_flag = true;
    } else {
        out.spearman_rho = sxy / std::sqrt(sxx * syy);
    }
    return out;
}

} // namespace maskeval
