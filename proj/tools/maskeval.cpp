#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "maskeval/headsim.hpp"
#include "maskeval/report.hpp"

namespace fs = std::filesystem;
using namespace maskeval;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitParse = 2;
constexpr int kExitConfig = 3;

int env_threads() {
    const char* v = std::getenv("MASKEVAL_THREADS");
    if (!v) return 0;
    return std::atoi(v);
}

void check_config(const RunConfig& c) {
    if (!(c.iou_threshold > 0 && c.iou_threshold < 1)) throw config_error("--iou must lie in (0, 1)");
    if (!(c.score_threshold >= 0 && c.score_threshold <= 1)) throw config_error("--score must lie in [0, 1]");
    if (!(c.mask_binarize > 0 && c.mask_binarize < 1)) throw config_error("--mask-binarize must lie in (0, 1)");
    if (c.max_detections < 1) throw config_error("--max-det must be >= 1");
    if (!(c.flag_threshold >= 0)) throw config_error("--flag-threshold must be >= 0");
}

struct EvaluationBundle {
    GroundTruthDoc gt;
    PredictionDoc pred;
    EvalInput input;
    std::optional<KindEvaluation> box;
    std::optional<KindEvaluation> mask;
};

EvaluationBundle run_evaluation(const std::string& gt_path, const std::string& pred_path,
                                const RunConfig& config, bool want_box, bool want_mask) {
    EvaluationBundle b;
    b.gt = load_ground_truth(gt_path);
    b.pred = load_predictions(pred_path);
    b.input = build_eval_input(b.gt, b.pred);
    const EvalOptions opts = config.eval_options();
    if (want_box) b.box = evaluate_kind(b.input, IouKind::box, opts);
    if (want_mask) b.mask = evaluate_kind(b.input, IouKind::mask, opts);
    return b;
}

int cmd_evaluate(const std::string& gt_path, const std::string& pred_path, const fs::path& out_dir,
                 RunConfig config) {
    config.command = "evaluate";
    const bool want_box = config.kind != "mask";
    const bool want_mask = config.kind != "box";
    EvaluationBundle b = run_evaluation(gt_path, pred_path, config, want_box, want_mask);

    MatchParams op;
    op.iou_threshold = config.iou_threshold;
    op.max_detections = config.max_detections;
    op.min_score = config.score_threshold;
    const IouTables box_tables = compute_ious(b.input, IouKind::box, config.mask_binarize, config.threads);
    const ConfusionMatrix confusion = confusion_matrix(b.input, box_tables, op);

    fs::create_directories(out_dir);
    const auto* box = b.box ? &*b.box : nullptr;
    const auto* mask = b.mask ? &*b.mask : nullptr;
    report::write_summary_json(out_dir / "summary.json", config, box, mask);
    report::write_per_class_csv(out_dir / "per_class.csv", config, b.input.classes(), box, mask);
    report::write_confusion_csv(out_dir / "confusion.csv", config, b.input.classes(), confusion);
    report::write_pr_curves_json(out_dir / "pr_curves.json", config, b.input.classes(), box, mask);
    return kExitOk;
}

int cmd_compare(const std::string& gt_path, const std::string& pred_path, const fs::path& out_dir,
                RunConfig config) {
    config.command = "compare";
    config.kind = "both";
    EvaluationBundle b = run_evaluation(gt_path, pred_path, config, true, true);
    const auto gaps = f1_gap_report(b.box->per_class, b.mask->per_class, config.flag_threshold);

    fs::create_directories(out_dir);
    report::write_f1_gap_csv(out_dir / "f1_gap.csv", config, b.input.classes(), gaps);
    report::write_f1_gap_json(out_dir / "f1_gap.json", config, b.input.classes(), gaps,
                              b.box->summary, b.mask->summary);
    return kExitOk;
}

int cmd_diagnose(const std::string& gt_path, const std::string& pred_path, const fs::path& out_dir,
                 RunConfig config) {
    config.command = "diagnose";
    config.kind = "both";
    EvaluationBundle b = run_evaluation(gt_path, pred_path, config, true, true);

    MatchParams op;
    op.iou_threshold = config.iou_threshold;
    op.max_detections = config.max_detections;
    op.min_score = config.score_threshold;
    const IouTables box_tables = compute_ious(b.input, IouKind::box, config.mask_binarize, config.threads);
    const IouTables mask_tables = compute_ious(b.input, IouKind::mask, config.mask_binarize, config.threads);
    const MatchResult box_match = match_detections(b.input, box_tables, op);
    const MatchResult mask_match = match_detections(b.input, mask_tables, op);
    const auto records = pairwise_divergence(b.input, box_match, mask_match, config.diagnose_params());

    const auto gaps = f1_gap_report(b.box->per_class, b.mask->per_class, config.flag_threshold);
    int defined = 0;
    for (const auto& g : gaps) defined += g.gap.has_value() ? 1 : 0;
    std::optional<ShapeCorrelation> correlation;
    try {
        correlation = shape_correlation(b.input, gaps);
    } catch (const eval_error&) {
        // Fewer than 3 classes with a defined gap; reported as such.
    }

    fs::create_directories(out_dir);
    report::write_divergence_csv(out_dir / "divergence.csv", config, b.input.classes(), records);
    report::write_modes_summary_json(out_dir / "modes_summary.json", config, b.input.classes(), records);
    report::write_shape_correlation_json(out_dir / "shape_correlation.json", config, b.input.classes(),
                                         correlation ? &*correlation : nullptr, defined);
    return kExitOk;
}

int cmd_convert(const std::string& vott_path, const fs::path& out_path, ImageDims target,
                RunConfig config) {
    config.command = "convert";
    std::ifstream in(vott_path, std::ios::binary);
    if (!in) throw parse_error("cannot open '" + vott_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const GroundTruthDoc doc = convert_vott(ss.str(), target);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    report::write_text_file(out_path, serialize_ground_truth(doc));
    return kExitOk;
}

int cmd_validate(const std::string& training, const std::string& validation, const std::string& testing,
                 const std::string& expected, const fs::path& out_dir, RunConfig config) {
    config.command = "validate";
    std::optional<GroundTruthDoc> docs[3];
    const std::string* paths[3] = {&training, &validation, &testing};
    for (int i = 0; i < 3; ++i) {
        if (!paths[i]->empty()) docs[i] = load_ground_truth(*paths[i]);
    }
    const DatasetSummary summary =
        validate_dataset(docs[0] ? &*docs[0] : nullptr, docs[1] ? &*docs[1] : nullptr,
                         docs[2] ? &*docs[2] : nullptr);

    std::vector<std::string> mismatches;
    if (!expected.empty()) {
        std::ifstream in(expected, std::ios::binary);
        if (!in) throw parse_error("cannot open '" + expected + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        mismatches = diff_summary(summary, ss.str());
    }

    fs::create_directories(out_dir);
    report::write_dataset_summary_csv(out_dir / "dataset_summary.csv", config, summary);
    report::write_dataset_summary_json(out_dir / "dataset_summary.json", config, summary, mismatches);
    if (!mismatches.empty()) {
        for (const auto& m : mismatches) std::cerr << "mismatch: " << m << "\n";
        return kExitMismatch;
    }
    return kExitOk;
}

int cmd_simulate(const std::string& spec_path, bool planted, bool perfect, const fs::path& out_dir,
                 bool seed_given, RunConfig config) {
    config.command = "simulate";
    ScenarioSpec spec;
    if (planted) {
        spec = planted_failure_scenario(config.seed);
    } else if (perfect) {
        spec = perfect_scenario(config.seed);
    } else if (!spec_path.empty()) {
        spec = load_scenario(spec_path);
        if (seed_given) spec.seed = config.seed;
    } else {
        throw config_error("simulate needs --spec, --planted, or --perfect");
    }
    config.seed = spec.seed;
    auto [gt, pred] = synth_scenario(spec);
    fs::create_directories(out_dir);
    report::write_text_file(out_dir / "gt.json", serialize_ground_truth(gt));
    report::write_text_file(out_dir / "predictions.json", serialize_predictions(pred));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"maskeval: box vs mask detection evaluation toolkit"};
    app.require_subcommand(1);

    RunConfig config;
    config.threads = env_threads();

    std::string gt_path, pred_path, out_dir = "maskeval_out";
    std::string vott_path, out_file = "ground_truth.json";
    std::string training, validation, testing, expected;
    std::string spec_path;
    bool planted = false, perfect = false;
    int target_w = 960, target_h = 540;

    auto add_common = [&](CLI::App* cmd, bool with_kind) {
        cmd->add_option("--iou", config.iou_threshold, "IoU threshold (default 0.5)");
        cmd->add_option("--score", config.score_threshold, "confidence threshold (default 0.5)");
        cmd->add_option("--max-det", config.max_detections, "per-image detection cap (default 300)");
        cmd->add_option("--mask-binarize", config.mask_binarize, "grid binarization threshold");
        cmd->add_option("--oversize-ratio", config.oversize_ratio, "OversizedMask area ratio");
        cmd->add_option("--offset-frac", config.offset_frac, "LocationMismatch centroid offset");
        cmd->add_option("--coverage-frac", config.coverage_frac, "PartialMask coverage bound");
        cmd->add_option("--flag-threshold", config.flag_threshold, "F1 gap flag threshold");
        if (with_kind) {
            cmd->add_option("--kind", config.kind, "box | mask | both")
                ->check(CLI::IsMember({"box", "mask", "both"}));
        }
    };

    auto* evaluate = app.add_subcommand("evaluate", "metric suite for one prediction dump");
    evaluate->add_option("--gt", gt_path, "ground-truth JSON")->required();
    evaluate->add_option("--pred", pred_path, "prediction JSON")->required();
    evaluate->add_option("--out", out_dir, "output directory")->required();
    add_common(evaluate, true);

    auto* compare = app.add_subcommand("compare", "box vs mask F1 gap report");
    compare->add_option("--gt", gt_path)->required();
    compare->add_option("--pred", pred_path)->required();
    compare->add_option("--out", out_dir)->required();
    add_common(compare, false);

    auto* diagnose = app.add_subcommand("diagnose", "divergence records and failure modes");
    diagnose->add_option("--gt", gt_path)->required();
    diagnose->add_option("--pred", pred_path)->required();
    diagnose->add_option("--out", out_dir)->required();
    add_common(diagnose, false);

    auto* convert = app.add_subcommand("convert", "VoTT-style export -> ground-truth JSON");
    convert->add_option("--vott", vott_path, "VoTT-style JSON")->required();
    convert->add_option("--out-file", out_file, "output ground-truth path")->required();
    convert->add_option("--target-width", target_w, "target frame width (default 960)");
    convert->add_option("--target-height", target_h, "target frame height (default 540)");

    auto* validate = app.add_subcommand("validate", "dataset split counts, optional expected diff");
    validate->add_option("--training", training, "training split ground truth");
    validate->add_option("--validation", validation, "validation split ground truth");
    validate->add_option("--testing", testing, "testing split ground truth");
    validate->add_option("--expected-summary", expected, "expected-summary JSON to diff against");
    validate->add_option("--out", out_dir)->required();

    auto* simulate = app.add_subcommand("simulate", "synthesize a GT/prediction pair");
    auto* spec_opt = simulate->add_option("--spec", spec_path, "scenario spec JSON");
    simulate->add_flag("--planted", planted, "built-in planted-failure scenario");
    simulate->add_flag("--perfect", perfect, "built-in perfect scenario");
    auto* seed_opt = simulate->add_option("--seed", config.seed, "generator seed");
    simulate->add_option("--out", out_dir)->required();
    spec_opt->excludes("--planted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        check_config(config);
        if (evaluate->parsed()) return cmd_evaluate(gt_path, pred_path, out_dir, config);
        if (compare->parsed()) return cmd_compare(gt_path, pred_path, out_dir, config);
        if (diagnose->parsed()) return cmd_diagnose(gt_path, pred_path, out_dir, config);
        if (convert->parsed()) {
            if (target_w < 1 || target_h < 1) throw config_error("target dims must be positive");
            return cmd_convert(vott_path, out_file, ImageDims{target_w, target_h}, config);
        }
        if (validate->parsed()) {
            return cmd_validate(training, validation, testing, expected, out_dir, config);
        }
        if (simulate->parsed()) {
            return cmd_simulate(spec_path, planted, perfect, out_dir, seed_opt->count() > 0, config);
        }
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
