#pragma once

#include <filesystem>
#include <map>

#include "maskeval/diagnose.hpp"
#include "maskeval/metrics.hpp"

namespace maskeval {

inline constexpr const char* kToolName = "maskeval";
inline constexpr const char* kToolVersion = "0.1.0";

// Everything a run needs; every report declares it in a metadata block so
// results are reproducible from the files alone.
struct RunConfig {
    std::string command;
    double iou_threshold = 0.5;
    double score_threshold = 0.5;
    int max_detections = 300;
    std::string kind = "both"; // box | mask | both
    double mask_binarize = 0.5;
    double oversize_ratio = 1.5;
    double offset_frac = 0.25;
    double coverage_frac = 0.5;
    double flag_threshold = 0.10;
    std::uint64_t seed = 0;
    int threads = 0;

    EvalOptions eval_options() const;
    DiagnoseParams diagnose_params() const;
};

// JSON reports carry {"tool", "version", "config": {...}}; CSV reports carry
// the same keys as "# key=value" comment lines ahead of the RFC-4180 payload.
namespace report {

void write_summary_json(const std::filesystem::path& path, const RunConfig& config,
                        const KindEvaluation* box, const KindEvaluation* mask);

void write_per_class_csv(const std::filesystem::path& path, const RunConfig& config,
                         const ClassTable& classes, const KindEvaluation* box,
                         const KindEvaluation* mask);

void write_confusion_csv(const std::filesystem::path& path, const RunConfig& config,
                         const ClassTable& classes, const ConfusionMatrix& matrix);

void write_pr_curves_json(const std::filesystem::path& path, const RunConfig& config,
                          const ClassTable& classes, const KindEvaluation* box,
                          const KindEvaluation* mask);

void write_f1_gap_csv(const std::filesystem::path& path, const RunConfig& config,
                      const ClassTable& classes, const std::vector<F1Gap>& gaps);

void write_f1_gap_json(const std::filesystem::path& path, const RunConfig& config,
                       const ClassTable& classes, const std::vector<F1Gap>& gaps,
                       const SummaryMetrics& box_summary, const SummaryMetrics& mask_summary);

void write_divergence_csv(const std::filesystem::path& path, const RunConfig& config,
                          const ClassTable& classes, const std::vector<DivergenceRecord>& records);

void write_modes_summary_json(const std::filesystem::path& path, const RunConfig& config,
                              const ClassTable& classes, const std::vector<DivergenceRecord>& records);

// `correlation` may be null when fewer than 3 classes had a defined gap; the
// file then carries insufficient_data = true.
void write_shape_correlation_json(const std::filesystem::path& path, const RunConfig& config,
                                  const ClassTable& classes, const ShapeCorrelation* correlation,
                                  int defined_classes);

void write_dataset_summary_csv(const std::filesystem::path& path, const RunConfig& config,
                               const DatasetSummary& summary);

void write_dataset_summary_json(const std::filesystem::path& path, const RunConfig& config,
                                const DatasetSummary& summary, const std::vector<std::string>& mismatches);

void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace report

} // namespace maskeval
