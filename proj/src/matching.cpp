#include "maskeval/matching.hpp"

#include <algorithm>
#include <map>

#include "maskeval/parallel.hpp"

namespace maskeval {

const char* to_string(IouKind kind) {
    return kind == IouKind::box ? "box" : "mask";
}

const GtInstance* EvalInput::gt_instance(int image, int gt_index) const {
    const int gi = images[image].gt_image;
    if (gi < 0) return nullptr;
    return &gt->images[gi].instances[gt_index];
}

const PredDetection* EvalInput::detection(int image, int det_index) const {
    const int pi = images[image].pred_image;
    if (pi < 0) return nullptr;
    return &pred->images[pi].detections[det_index];
}

int EvalInput::num_gts(int image) const {
    const int gi = images[image].gt_image;
    return gi < 0 ? 0 : static_cast<int>(gt->images[gi].instances.size());
}

int EvalInput::num_dets(int image) const {
    const int pi = images[image].pred_image;
    return pi < 0 ? 0 : static_cast<int>(pred->images[pi].detections.size());
}

EvalInput build_eval_input(const GroundTruthDoc& gt, const PredictionDoc& pred) {
    EvalInput input;
    input.gt = &gt;
    input.pred = &pred;

    std::map<std::string, int> pred_index;
    for (size_t i = 0; i < pred.images.size(); ++i) pred_index[pred.images[i].id] = static_cast<int>(i);

    std::map<std::string, int> seen;
    for (size_t i = 0; i < gt.images.size(); ++i) {
        EvalInput::ImageRef ref;
        ref.id = gt.images[i].id;
        ref.gt_image = static_cast<int>(i);
        auto it = pred_index.find(ref.id);
        if (it != pred_index.end()) ref.pred_image = it->second;
        seen[ref.id] = 1;
        input.images.push_back(std::move(ref));
    }
    for (size_t i = 0; i < pred.images.size(); ++i) {
        if (seen.count(pred.images[i].id)) continue;
        EvalInput::ImageRef ref;
        ref.id = pred.images[i].id;
        ref.pred_image = static_cast<int>(i);
        input.images.push_back(std::move(ref));
    }

    // Validate detections against the joined context: class range and mask dims.
    const int k = gt.classes.num_classes();
    for (const auto& img : pred.images) {
        for (size_t d = 0; d < img.detections.size(); ++d) {
            const auto& det = img.detections[d];
            const std::string ctx = "image '" + img.id + "' detection " + std::to_string(d);
            if (det.class_index > k) {
                throw parse_error(ctx + ": class_index " + std::to_string(det.class_index) +
                                  " exceeds the class table (K=" + std::to_string(k) + ")");
            }
            if (det.rle && !(det.rle->dims == gt.dims)) {
                throw parse_error(ctx + ": mask dims differ from the frame dims");
            }
        }
    }
    return input;
}

BinaryMask materialize_gt_mask(const GtInstance& inst, const ImageDims& dims) {
    if (inst.rle) return rle_decode(*inst.rle);
    if (inst.polygon) return polygon_rasterize(*inst.polygon, dims);
    throw mask_error("ground-truth instance carries no geometry");
}

std::optional<BinaryMask> materialize_det_mask(const PredDetection& det, const ImageDims& dims,
                                               double binarize) {
    if (det.rle) return rle_decode(*det.rle);
    if (det.grid) return grid_extrapolate(*det.grid, clip_box(det.box, dims), dims, binarize);
    return std::nullopt;
}

IouTables compute_ious(const EvalInput& input, IouKind kind, double binarize, int threads) {
    IouTables tables;
    tables.kind = kind;
    tables.binarize = binarize;
    tables.images.resize(input.images.size());

    const int n = static_cast<int>(input.images.size());
    parallel_for(n, threads, [&](int idx) {
        auto& t = tables.images[idx];
        t.n_dets = input.num_dets(idx);
        t.n_gts = input.num_gts(idx);
        t.iou.assign(static_cast<size_t>(t.n_dets) * t.n_gts, 0.0);
        if (kind == IouKind::mask) t.det_has_mask.assign(static_cast<size_t>(t.n_dets), 0);
        if (t.n_dets == 0) return;

        if (kind == IouKind::box) {
            for (int d = 0; d < t.n_dets; ++d) {
                const auto* det = input.detection(idx, d);
                for (int g = 0; g < t.n_gts; ++g) {
                    const auto* gt = input.gt_instance(idx, g);
                    t.iou[static_cast<size_t>(d) * t.n_gts + g] = box_iou(det->box, gt->box);
                }
            }
            return;
        }

        // Mask kind: materialize bitmaps once per image, same-class pairs only.
        std::vector<std::optional<BinaryMask>> det_masks(static_cast<size_t>(t.n_dets));
        for (int d = 0; d < t.n_dets; ++d) {
            det_masks[d] = materialize_det_mask(*input.detection(idx, d), input.dims(), binarize);
            t.det_has_mask[d] = det_masks[d].has_value() ? 1 : 0;
        }
        std::vector<std::optional<BinaryMask>> gt_masks(static_cast<size_t>(t.n_gts));
        for (int d = 0; d < t.n_dets; ++d) {
            if (!det_masks[d]) continue;
            const auto* det = input.detection(idx, d);
            for (int g = 0; g < t.n_gts; ++g) {
                const auto* gt = input.gt_instance(idx, g);
                if (gt->class_index != det->class_index) continue;
                if (!gt_masks[g]) gt_masks[g] = materialize_gt_mask(*gt, input.dims());
                t.iou[static_cast<size_t>(d) * t.n_gts + g] = mask_iou(*det_masks[d], *gt_masks[g]);
            }
        }
    });
    return tables;
}

namespace {

// Detections of one image that survive the score filter, sorted by score
// descending with input order preserved on ties, truncated to the cap.
std::vector<int> considered_order(const EvalInput& input, int image, const MatchParams& params) {
    const int n = input.num_dets(image);
    std::vector<int> order;
    order.reserve(static_cast<size_t>(n));
    for (int d = 0; d < n; ++d) {
        if (input.detection(image, d)->score >= params.min_score) order.push_back(d);
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return input.detection(image, a)->score > input.detection(image, b)->score;
    });
    if (params.max_detections >= 0 && static_cast<int>(order.size()) > params.max_detections) {
        order.resize(static_cast<size_t>(params.max_detections));
    }
    return order;
}

void validate_params(const MatchParams& params) {
    if (!(params.iou_threshold > 0.0 && params.iou_threshold < 1.0)) {
        throw eval_error("match: iou_threshold must lie in (0, 1)");
    }
    if (params.max_detections < 0) throw eval_error("match: max_detections must be >= 0");
}

} // namespace

long MatchResult::tp(int class_index) const {
    long n = 0;
    for (const auto& e : per_class[class_index]) n += e.tp ? 1 : 0;
    return n;
}

long MatchResult::fp(int class_index) const {
    long n = 0;
    for (const auto& e : per_class[class_index]) n += e.tp ? 0 : 1;
    return n;
}

long MatchResult::fn(int class_index) const {
    return gt_count[class_index] - tp(class_index);
}

const MatchEntry* MatchResult::find(int image, int det) const {
    for (const auto& cls : per_class) {
        for (const auto& e : cls) {
            if (e.image == image && e.det == det) return &e;
        }
    }
    return nullptr;
}

MatchResult match_detections(const EvalInput& input, const IouTables& tables, const MatchParams& params) {
    validate_params(params);
    const int k = input.classes().num_classes();
    MatchResult result;
    result.kind = tables.kind;
    result.params = params;
    result.per_class.assign(static_cast<size_t>(k) + 1, {});
    result.gt_count.assign(static_cast<size_t>(k) + 1, 0);

    for (size_t image = 0; image < input.images.size(); ++image) {
        const int idx = static_cast<int>(image);
        const auto& t = tables.images[image];
        const int n_gts = input.num_gts(idx);
        for (int g = 0; g < n_gts; ++g) {
            result.gt_count[input.gt_instance(idx, g)->class_index] += 1;
        }

        const std::vector<int> order = considered_order(input, idx, params);
        result.considered += static_cast<long>(order.size());
        std::vector<char> gt_used(static_cast<size_t>(n_gts), 0);

        for (int d : order) {
            const auto* det = input.detection(idx, d);
            MatchEntry entry;
            entry.image = idx;
            entry.det = d;
            entry.class_index = det->class_index;
            entry.score = det->score;

            const bool has_mask =
                tables.kind == IouKind::box || (!t.det_has_mask.empty() && t.det_has_mask[d]);
            if (!has_mask) result.missing_mask.emplace_back(idx, d);

            int best_gt = -1;
            double best_iou = 0.0;
            if (has_mask) {
                for (int g = 0; g < n_gts; ++g) {
                    if (gt_used[g]) continue;
                    if (input.gt_instance(idx, g)->class_index != det->class_index) continue;
                    const double iou = t.at(d, g);
                    if (iou > best_iou) {
                        best_iou = iou;
                        best_gt = g;
                    }
                }
            }
            entry.iou = best_iou;
            if (best_gt >= 0 && best_iou >= params.iou_threshold) {
                entry.gt = best_gt;
                entry.tp = true;
                gt_used[best_gt] = 1;
            }
            result.per_class[entry.class_index].push_back(entry);
        }
        for (int g = 0; g < n_gts; ++g) {
            if (!gt_used[g]) result.unmatched_gts.emplace_back(idx, g);
        }
    }

    for (auto& cls : result.per_class) {
        std::sort(cls.begin(), cls.end(), [](const MatchEntry& a, const MatchEntry& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.image != b.image) return a.image < b.image;
            return a.det < b.det;
        });
    }
    return result;
}

ConfusionMatrix confusion_matrix(const EvalInput& input, const IouTables& box_tables,
                                 const MatchParams& params) {
    validate_params(params);
    if (box_tables.kind != IouKind::box) {
        throw eval_error("confusion_matrix: needs box IoU tables");
    }
    const int k = input.classes().num_classes();
    ConfusionMatrix m;
    m.size = k + 1;
    m.cells.assign(static_cast<size_t>(m.size) * m.size, 0);

    for (size_t image = 0; image < input.images.size(); ++image) {
        const int idx = static_cast<int>(image);
        const auto& t = box_tables.images[image];
        const int n_gts = input.num_gts(idx);
        const std::vector<int> order = considered_order(input, idx, params);
        std::vector<char> gt_used(static_cast<size_t>(n_gts), 0);

        for (int d : order) {
            const auto* det = input.detection(idx, d);
            int best_gt = -1;
            double best_iou = 0.0;
            for (int g = 0; g < n_gts; ++g) {
                if (gt_used[g]) continue;
                const double iou = t.at(d, g);
                if (iou > best_iou) {
                    best_iou = iou;
                    best_gt = g;
                }
            }
            if (best_gt >= 0 && best_iou >= params.iou_threshold) {
                gt_used[best_gt] = 1;
                m.at(input.gt_instance(idx, best_gt)->class_index, det->class_index) += 1;
            } else {
                m.at(0, det->class_index) += 1;
            }
        }
        for (int g = 0; g < n_gts; ++g) {
            if (!gt_used[g]) m.at(input.gt_instance(idx, g)->class_index, 0) += 1;
        }
    }
    return m;
}

} // namespace maskeval
