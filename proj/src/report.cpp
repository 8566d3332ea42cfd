#include "maskeval/report.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace maskeval {

using ordered_json = nlohmann::ordered_json;

EvalOptions RunConfig::eval_options() const {
    EvalOptions opts;
    opts.iou_threshold = iou_threshold;
    opts.score_threshold = score_threshold;
    opts.max_detections = max_detections;
    opts.mask_binarize = mask_binarize;
    opts.threads = threads;
    return opts;
}

DiagnoseParams RunConfig::diagnose_params() const {
    DiagnoseParams p;
    p.mask_iou_threshold = iou_threshold;
    p.oversize_ratio = oversize_ratio;
    p.offset_frac = offset_frac;
    p.coverage_frac = coverage_frac;
    p.mask_binarize = mask_binarize;
    return p;
}

namespace report {

namespace {

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string cell(const std::optional<double>& v) {
    return v ? fmt4(*v) : "-";
}

ordered_json metadata(const RunConfig& c) {
    ordered_json config;
    config["command"] = c.command;
    config["iou_threshold"] = c.iou_threshold;
    config["score_threshold"] = c.score_threshold;
    config["max_detections"] = c.max_detections;
    config["kind"] = c.kind;
    config["mask_binarize"] = c.mask_binarize;
    config["oversize_ratio"] = c.oversize_ratio;
    config["offset_frac"] = c.offset_frac;
    config["coverage_frac"] = c.coverage_frac;
    config["flag_threshold"] = c.flag_threshold;
    config["seed"] = c.seed;
    config["threads"] = c.threads;
    ordered_json meta;
    meta["tool"] = kToolName;
    meta["version"] = kToolVersion;
    meta["config"] = std::move(config);
    return meta;
}

// The same metadata as "# key=value" lines ahead of the CSV payload.
std::string csv_preamble(const RunConfig& c) {
    std::string out;
    out += std::string("# tool=") + kToolName + " version=" + kToolVersion + "\r\n";
    out += "# command=" + c.command + " kind=" + c.kind + " iou=" + fmt4(c.iou_threshold) +
           " score=" + fmt4(c.score_threshold) + " max_det=" + std::to_string(c.max_detections) +
           " mask_binarize=" + fmt4(c.mask_binarize) + "\r\n";
    out += "# oversize_ratio=" + fmt4(c.oversize_ratio) + " offset_frac=" + fmt4(c.offset_frac) +
           " coverage_frac=" + fmt4(c.coverage_frac) + " flag_threshold=" + fmt4(c.flag_threshold) +
           " seed=" + std::to_string(c.seed) + "\r\n";
    return out;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

ordered_json json_opt(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

ordered_json summary_json(const SummaryMetrics& s) {
    ordered_json j;
    j["map"] = json_opt(s.map);
    j["ap50"] = json_opt(s.ap50);
    j["ap75"] = json_opt(s.ap75);
    j["ar_at_1"] = json_opt(s.ar_at_1);
    j["ar_at_10"] = json_opt(s.ar_at_10);
    j["ar_at_100"] = json_opt(s.ar_at_100);
    return j;
}

void write_json_file(const std::filesystem::path& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write '" + path.string() + "'");
    out << j.dump(2) << "\n";
}

} // namespace

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write '" + path.string() + "'");
    out << content;
}

void write_summary_json(const std::filesystem::path& path, const RunConfig& config,
                        const KindEvaluation* box, const KindEvaluation* mask) {
    ordered_json j;
    j["metadata"] = metadata(config);
    ordered_json events;
    events["missing_mask_detections"] = mask ? mask->missing_mask_detections : 0;
    j["metadata"]["events"] = std::move(events);
    if (box) j["box"] = summary_json(box->summary);
    if (mask) j["mask"] = summary_json(mask->summary);
    write_json_file(path, j);
}

namespace {

void per_class_rows(std::string& out, const char* kind, const ClassTable& classes,
                    const KindEvaluation& eval) {
    for (const auto& row : eval.per_class) {
        out += std::string(kind) + "," + csv_quote(classes.name(row.class_index)) + "," +
               std::to_string(row.support) + "," + std::to_string(row.tp) + "," +
               std::to_string(row.fp) + "," + std::to_string(row.fn) + "," + cell(row.precision) +
               "," + cell(row.recall) + "," + cell(row.f1) + "," + cell(row.ap) + "," +
               (row.max_precision ? "1" : "0") + "," + (row.max_recall ? "1" : "0") + "," +
               (row.max_f1 ? "1" : "0") + "\r\n";
    }
}

} // namespace

void write_per_class_csv(const std::filesystem::path& path, const RunConfig& config,
                         const ClassTable& classes, const KindEvaluation* box,
                         const KindEvaluation* mask) {
    std::string out = csv_preamble(config);
    out += "kind,class,support,tp,fp,fn,precision,recall,f1,ap,max_precision,max_recall,max_f1\r\n";
    if (box) per_class_rows(out, "box", classes, *box);
    if (mask) per_class_rows(out, "mask", classes, *mask);
    write_text_file(path, out);
}

void write_confusion_csv(const std::filesystem::path& path, const RunConfig& config,
                         const ClassTable& classes, const ConfusionMatrix& matrix) {
    std::string out = csv_preamble(config);
    out += "true\\predicted";
    for (int c = 0; c < matrix.size; ++c) out += "," + csv_quote(classes.name(c));
    out += "\r\n";
    for (int t = 0; t < matrix.size; ++t) {
        out += csv_quote(classes.name(t));
        for (int p = 0; p < matrix.size; ++p) out += "," + std::to_string(matrix.at(t, p));
        out += "\r\n";
    }
    write_text_file(path, out);
}

void write_pr_curves_json(const std::filesystem::path& path, const RunConfig& config,
                          const ClassTable& classes, const KindEvaluation* box,
                          const KindEvaluation* mask) {
    ordered_json j;
    j["metadata"] = metadata(config);
    ordered_json kinds;
    auto emit = [&](const char* name, const KindEvaluation& eval) {
        ordered_json arr = ordered_json::array();
        for (const auto& curve : eval.curves) {
            ordered_json cj;
            cj["class"] = classes.name(curve.class_index);
            cj["iou_threshold"] = curve.iou_threshold;
            cj["recall"] = curve.recall;
            cj["precision"] = curve.precision;
            arr.push_back(std::move(cj));
        }
        kinds[name] = std::move(arr);
    };
    if (box) emit("box", *box);
    if (mask) emit("mask", *mask);
    j["kinds"] = std::move(kinds);
    write_json_file(path, j);
}

void write_f1_gap_csv(const std::filesystem::path& path, const RunConfig& config,
                      const ClassTable& classes, const std::vector<F1Gap>& gaps) {
    std::string out = csv_preamble(config);
    out += "class,f1_box,f1_mask,gap,flagged\r\n";
    for (const auto& g : gaps) {
        out += csv_quote(classes.name(g.class_index)) + "," + cell(g.f1_box) + "," + cell(g.f1_mask) +
               "," + cell(g.gap) + "," + (g.flagged ? "1" : "0") + "\r\n";
    }
    write_text_file(path, out);
}

void write_f1_gap_json(const std::filesystem::path& path, const RunConfig& config,
                       const ClassTable& classes, const std::vector<F1Gap>& gaps,
                       const SummaryMetrics& box_summary, const SummaryMetrics& mask_summary) {
    ordered_json j;
    j["metadata"] = metadata(config);
    ordered_json arr = ordered_json::array();
    for (const auto& g : gaps) {
        ordered_json gj;
        gj["class"] = classes.name(g.class_index);
        gj["f1_box"] = json_opt(g.f1_box);
        gj["f1_mask"] = json_opt(g.f1_mask);
        gj["gap"] = json_opt(g.gap);
        gj["flagged"] = g.flagged;
        arr.push_back(std::move(gj));
    }
    j["classes"] = std::move(arr);
    j["summary_box"] = summary_json(box_summary);
    j["summary_mask"] = summary_json(mask_summary);
    write_json_file(path, j);
}

void write_divergence_csv(const std::filesystem::path& path, const RunConfig& config,
                          const ClassTable& classes, const std::vector<DivergenceRecord>& records) {
    std::string out = csv_preamble(config);
    out += "image,det,gt,class,score,box_iou,mask_iou,gt_coverage,pred_excess,centroid_offset,mode,"
           "det_x0,det_y0,det_x1,det_y1,gt_x0,gt_y0,gt_x1,gt_y1\r\n";
    for (const auto& r : records) {
        out += csv_quote(r.image_id) + "," + std::to_string(r.det) + "," + std::to_string(r.gt) + "," +
               csv_quote(classes.name(r.class_index)) + "," + fmt4(r.score) + "," + fmt4(r.box_iou) +
               "," + fmt4(r.mask_iou) + "," + fmt4(r.gt_mask_coverage) + "," + fmt4(r.pred_excess) +
               "," + fmt4(r.centroid_offset) + "," + to_string(r.mode) + "," + fmt4(r.det_box.x_min) +
               "," + fmt4(r.det_box.y_min) + "," + fmt4(r.det_box.x_max) + "," + fmt4(r.det_box.y_max) +
               "," + fmt4(r.gt_box.x_min) + "," + fmt4(r.gt_box.y_min) + "," + fmt4(r.gt_box.x_max) +
               "," + fmt4(r.gt_box.y_max) + "\r\n";
    }
    write_text_file(path, out);
}

void write_modes_summary_json(const std::filesystem::path& path, const RunConfig& config,
                              const ClassTable& classes, const std::vector<DivergenceRecord>& records) {
    static constexpr FailureMode kModes[] = {FailureMode::NoDivergence, FailureMode::PartialMask,
                                             FailureMode::LowMaskIoU, FailureMode::LocationMismatch,
                                             FailureMode::OversizedMask};
    ordered_json j;
    j["metadata"] = metadata(config);
    j["total_records"] = records.size();

    ordered_json totals;
    for (const auto mode : kModes) {
        long n = 0;
        for (const auto& r : records) n += r.mode == mode ? 1 : 0;
        totals[to_string(mode)] = n;
    }
    j["modes"] = std::move(totals);

    ordered_json per_class;
    for (int c = 1; c <= classes.num_classes(); ++c) {
        bool any = false;
        ordered_json cj;
        for (const auto mode : kModes) {
            long n = 0;
            for (const auto& r : records) {
                if (r.class_index == c && r.mode == mode) ++n;
            }
            cj[to_string(mode)] = n;
            any = any || n > 0;
        }
        if (any) per_class[classes.name(c)] = std::move(cj);
    }
    j["per_class"] = std::move(per_class);
    write_json_file(path, j);
}

void write_shape_correlation_json(const std::filesystem::path& path, const RunConfig& config,
                                  const ClassTable& classes, const ShapeCorrelation* correlation,
                                  int defined_classes) {
    ordered_json j;
    j["metadata"] = metadata(config);
    j["defined_classes"] = defined_classes;
    j["insufficient_data"] = correlation == nullptr;
    if (correlation) {
        j["spearman_rho"] = correlation->spearman_rho;
        j["tie_flag"] = correlation->tie_flag;
        ordered_json arr = ordered_json::array();
        for (const auto& stat : correlation->per_class) {
            ordered_json sj;
            sj["class"] = classes.name(stat.class_index);
            sj["instances"] = stat.instances;
            sj["mean_elongation"] = stat.mean_elongation;
            sj["gap"] = json_opt(stat.gap);
            arr.push_back(std::move(sj));
        }
        j["per_class"] = std::move(arr);
    } else {
        j["spearman_rho"] = nullptr;
        j["tie_flag"] = false;
        j["per_class"] = ordered_json::array();
    }
    write_json_file(path, j);
}

void write_dataset_summary_csv(const std::filesystem::path& path, const RunConfig& config,
                               const DatasetSummary& summary) {
    std::string out = csv_preamble(config);
    out += "class,training,validation,testing,total\r\n";
    for (size_t i = 0; i < summary.counts.size(); ++i) {
        const auto& row = summary.counts[i];
        out += csv_quote(summary.classes.name(static_cast<int>(i) + 1)) + "," + std::to_string(row[0]) +
               "," + std::to_string(row[1]) + "," + std::to_string(row[2]) + "," +
               std::to_string(summary.class_total(static_cast<int>(i))) + "\r\n";
    }
    const auto t = summary.split_totals();
    out += "TOTAL," + std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]) +
           "," + std::to_string(summary.grand_total()) + "\r\n";
    write_text_file(path, out);
}

void write_dataset_summary_json(const std::filesystem::path& path, const RunConfig& config,
                                const DatasetSummary& summary,
                                const std::vector<std::string>& mismatches) {
    ordered_json j;
    j["metadata"] = metadata(config);
    ordered_json counts;
    for (size_t i = 0; i < summary.counts.size(); ++i) {
        const auto& row = summary.counts[i];
        ordered_json cj;
        cj["training"] = row[0];
        cj["validation"] = row[1];
        cj["testing"] = row[2];
        cj["total"] = summary.class_total(static_cast<int>(i));
        counts[summary.classes.name(static_cast<int>(i) + 1)] = std::move(cj);
    }
    j["counts"] = std::move(counts);
    const auto t = summary.split_totals();
    ordered_json totals;
    totals["training"] = t[0];
    totals["validation"] = t[1];
    totals["testing"] = t[2];
    totals["overall"] = summary.grand_total();
    j["totals"] = std::move(totals);
    j["mismatches"] = mismatches;
    write_json_file(path, j);
}

} // namespace report
} // namespace maskeval
