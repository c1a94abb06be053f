#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "growcut/volume.hpp"

namespace growcut::metrics {

struct OverlapCounts {
    std::size_t a = 0;
    std::size_t r = 0;
    std::size_t intersection = 0;
};

/// Voxel counts of `label` in each mask and in both.
OverlapCounts overlap(const LabelVolume& a, const LabelVolume& r, Label label = kForeground);

/// 2|A∩R| / (|A| + |R|). Two empty masks agree perfectly (1).
double dsc(const OverlapCounts& counts) noexcept;
double dsc(const LabelVolume& a, const LabelVolume& r, Label label = kForeground);

/// Exact squared Euclidean distance (index units) from every voxel to the
/// nearest voxel of `label`. Separable lower-envelope transform; voxels are
/// at +inf when the label is absent.
std::vector<double> squared_distance_transform(const LabelVolume& mask, Label label = kForeground);

/// Symmetric Hausdorff distance over all voxels of both masks, Euclidean in
/// voxel-index units. Either mask empty is an error.
double hausdorff(const LabelVolume& a, const LabelVolume& r, Label label = kForeground);

/// count(label) * sx * sy * sz / 1000.
double volume_cm3(const LabelVolume& mask, const Vec3& spacing, Label label = kForeground);

struct EvaluationReport {
    double dsc = 0.0;
    double hausdorff_voxel = 0.0;
    double volume_a_cm3 = 0.0;
    double volume_r_cm3 = 0.0;
    std::size_t voxels_a = 0;
    std::size_t voxels_r = 0;
    std::size_t voxels_intersection = 0;
    std::optional<double> wall_time_ms;

    nlohmann::json to_json() const;
};

/// `a` is the algorithm mask, `r` the reference.
EvaluationReport evaluate(const LabelVolume& a, const LabelVolume& r, const Vec3& spacing,
                          std::optional<double> wall_time_ms = std::nullopt, Label label = kForeground);

/// One line of the batch table: manual = reference, alg = algorithm.
struct CaseRow {
    std::string case_id;
    double vol_manual_cm3 = 0.0;
    double vol_alg_cm3 = 0.0;
    double hd_voxel = 0.0;
    double dsc_pct = 0.0;
    std::optional<double> time_min;
};

CaseRow to_row(const std::string& case_id, const EvaluationReport& report);

struct ColumnSummary {
    std::size_t n = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation (n - 1); 0 when n < 2
};

ColumnSummary summarize(const std::vector<double>& values);

struct BatchSummary {
    ColumnSummary vol_manual_cm3;
    ColumnSummary vol_alg_cm3;
    ColumnSummary hd_voxel;
    ColumnSummary dsc_pct;
    std::optional<ColumnSummary> time_min;

    nlohmann::json to_json() const;
};

BatchSummary summarize(const std::vector<CaseRow>& rows);

inline constexpr const char* kCsvHeader = "case_id,vol_manual_cm3,vol_alg_cm3,hd_voxel,dsc_pct,time_min";

/// Header, one line per case, then "min", "max", "mean" and "sd" lines.
/// Numbers use the shortest round-trip decimal form.
std::string to_csv(const std::vector<CaseRow>& rows, const BatchSummary& summary);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

} // namespace growcut::metrics
