#include "growcut/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace growcut::metrics {

OverlapCounts overlap(const LabelVolume& a, const LabelVolume& r, Label label)
{
    require_same_dims(a.geometry(), r.geometry(), "overlap");
    OverlapCounts c;
    const auto da = a.data();
    const auto dr = r.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        const bool in_a = da[i] == label;
        const bool in_r = dr[i] == label;
        c.a += in_a;
        c.r += in_r;
        c.intersection += in_a && in_r;
    }
    return c;
}

double dsc(const OverlapCounts& counts) noexcept
{
    const std::size_t denom = counts.a + counts.r;
    if (denom == 0) return 1.0;
    return static_cast<double>(2 * counts.intersection) / static_cast<double>(denom);
}

double dsc(const LabelVolume& a, const LabelVolume& r, Label label) { return dsc(overlap(a, r, label)); }

namespace {

// 1-D squared distance transform of a sampled function (lower envelope of
// parabolas). Infinite samples never enter the envelope.
void transform_line(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    v.resize(static_cast<std::size_t>(n));
    z.resize(static_cast<std::size_t>(n) + 1);
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == inf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -inf;
            z[1] = inf;
            continue;
        }
        auto intersect = [&](int p) {
            return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
        };
        // z[0] is -inf, so the loop always stops at k == 0.
        double s = intersect(v[k]);
        while (s <= z[k]) {
            --k;
            s = intersect(v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    if (k < 0) {
        std::fill(d, d + n, inf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const double dq = q - v[j];
        d[q] = dq * dq + f[v[j]];
    }
}

} // namespace

std::vector<double> squared_distance_transform(const LabelVolume& mask, Label label)
{
    const Index3 dims = mask.dims();
    const Geometry& g = mask.geometry();
    std::vector<double> dt(mask.size());
    for (std::size_t i = 0; i < dt.size(); ++i) {
        dt[i] = mask[i] == label ? 0.0 : std::numeric_limits<double>::infinity();
    }
    const int longest = std::max({dims[0], dims[1], dims[2]});
    std::vector<double> in(static_cast<std::size_t>(longest));
    std::vector<double> out(static_cast<std::size_t>(longest));
    std::vector<int> v;
    std::vector<double> z;
    const std::array<std::size_t, 3> stride{1, static_cast<std::size_t>(dims[0]),
                                            static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1])};
    for (int axis = 0; axis < 3; ++axis) {
        const int a1 = (axis + 1) % 3;
        const int a2 = (axis + 2) % 3;
        for (int u = 0; u < dims[a1]; ++u) {
            for (int w = 0; w < dims[a2]; ++w) {
                Index3 start{};
                start[a1] = u;
                start[a2] = w;
                const std::size_t base = g.linear(start[0], start[1], start[2]);
                const int n = dims[axis];
                for (int q = 0; q < n; ++q) in[q] = dt[base + q * stride[axis]];
                transform_line(in.data(), out.data(), n, v, z);
                for (int q = 0; q < n; ++q) dt[base + q * stride[axis]] = out[q];
            }
        }
    }
    return dt;
}

namespace {

double directed_squared(const LabelVolume& from, const std::vector<double>& dt_to, Label label)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
        if (from[i] == label) worst = std::max(worst, dt_to[i]);
    }
    return worst;
}

} // namespace

double hausdorff(const LabelVolume& a, const LabelVolume& r, Label label)
{
    require_same_dims(a.geometry(), r.geometry(), "hausdorff");
    if (count_label(a, label) == 0 || count_label(r, label) == 0) {
        throw Error(Error::Kind::UndefinedDistance, "Hausdorff distance is undefined for an empty mask");
    }
    const auto dt_r = squared_distance_transform(r, label);
    const auto dt_a = squared_distance_transform(a, label);
    return std::sqrt(std::max(directed_squared(a, dt_r, label), directed_squared(r, dt_a, label)));
}

double volume_cm3(const LabelVolume& mask, const Vec3& spacing, Label label)
{
    for (double s : spacing) {
        if (!(s > 0.0)) throw parameter_error("spacing must be > 0");
    }
    return static_cast<double>(count_label(mask, label)) * (spacing[0] * spacing[1] * spacing[2]) / 1000.0;
}

nlohmann::json EvaluationReport::to_json() const
{
    nlohmann::json j{
        {"dsc", dsc},
        {"dsc_pct", dsc * 100.0},
        {"hausdorff_voxel", hausdorff_voxel},
        {"volume_a_cm3", volume_a_cm3},
        {"volume_r_cm3", volume_r_cm3},
        {"voxels_a", voxels_a},
        {"voxels_r", voxels_r},
        {"voxels_intersection", voxels_intersection},
    };
    j["wall_time_ms"] = wall_time_ms ? nlohmann::json(*wall_time_ms) : nlohmann::json(nullptr);
    return j;
}

EvaluationReport evaluate(const LabelVolume& a, const LabelVolume& r, const Vec3& spacing,
                          std::optional<double> wall_time_ms, Label label)
{
    const OverlapCounts c = overlap(a, r, label);
    EvaluationReport rep;
    rep.dsc = dsc(c);
    rep.hausdorff_voxel = hausdorff(a, r, label);
    rep.volume_a_cm3 = volume_cm3(a, spacing, label);
    rep.volume_r_cm3 = volume_cm3(r, spacing, label);
    rep.voxels_a = c.a;
    rep.voxels_r = c.r;
    rep.voxels_intersection = c.intersection;
    rep.wall_time_ms = wall_time_ms;
    return rep;
}

CaseRow to_row(const std::string& case_id, const EvaluationReport& report)
{
    CaseRow row;
    row.case_id = case_id;
    row.vol_manual_cm3 = report.volume_r_cm3;
    row.vol_alg_cm3 = report.volume_a_cm3;
    row.hd_voxel = report.hausdorff_voxel;
    row.dsc_pct = report.dsc * 100.0;
    if (report.wall_time_ms) row.time_min = *report.wall_time_ms / 60000.0;
    return row;
}

ColumnSummary summarize(const std::vector<double>& values)
{
    ColumnSummary s;
    s.n = values.size();
    if (values.empty()) return s;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

BatchSummary summarize(const std::vector<CaseRow>& rows)
{
    auto column = [&](auto member) {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(r.*member);
        return summarize(v);
    };
    BatchSummary s;
    s.vol_manual_cm3 = column(&CaseRow::vol_manual_cm3);
    s.vol_alg_cm3 = column(&CaseRow::vol_alg_cm3);
    s.hd_voxel = column(&CaseRow::hd_voxel);
    s.dsc_pct = column(&CaseRow::dsc_pct);
    std::vector<double> times;
    for (const auto& r : rows) {
        if (r.time_min) times.push_back(*r.time_min);
    }
    if (!times.empty()) s.time_min = summarize(times);
    return s;
}

nlohmann::json BatchSummary::to_json() const
{
    auto col = [](const ColumnSummary& c) {
        return nlohmann::json{{"n", c.n}, {"min", c.min}, {"max", c.max}, {"mean", c.mean}, {"sd", c.sd}};
    };
    nlohmann::json j{{"vol_manual_cm3", col(vol_manual_cm3)},
                     {"vol_alg_cm3", col(vol_alg_cm3)},
                     {"hd_voxel", col(hd_voxel)},
                     {"dsc_pct", col(dsc_pct)}};
    j["time_min"] = time_min ? col(*time_min) : nlohmann::json(nullptr);
    return j;
}

std::string format_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string to_csv(const std::vector<CaseRow>& rows, const BatchSummary& summary)
{
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : rows) {
        out += r.case_id + "," + format_number(r.vol_manual_cm3) + "," + format_number(r.vol_alg_cm3) + "," +
               format_number(r.hd_voxel) + "," + format_number(r.dsc_pct) + "," +
               (r.time_min ? format_number(*r.time_min) : std::string()) + "\n";
    }
    auto stat_line = [&](const char* name, double ColumnSummary::*field) {
        out += std::string(name) + "," + format_number(summary.vol_manual_cm3.*field) + "," +
               format_number(summary.vol_alg_cm3.*field) + "," + format_number(summary.hd_voxel.*field) + "," +
               format_number(summary.dsc_pct.*field) + "," +
               (summary.time_min ? format_number((*summary.time_min).*field) : std::string()) + "\n";
    };
    stat_line("min", &ColumnSummary::min);
    stat_line("max", &ColumnSummary::max);
    stat_line("mean", &ColumnSummary::mean);
    stat_line("sd", &ColumnSummary::sd);
    return out;
}

} // namespace growcut::metrics
