#include "growcut/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "growcut/parallel.hpp"

namespace growcut {
namespace {

struct AxisTaps {
    std::vector<int> lo;
    std::vector<int> hi;
    std::vector<double> frac;
};

// Per-axis sample positions: output voxel o lands at continuous source index
// (o + 0.5) * target / spacing - 0.5, clamped to the valid range.
AxisTaps axis_taps(int src_n, double src_spacing, int dst_n, double target)
{
    AxisTaps taps;
    taps.lo.resize(static_cast<std::size_t>(dst_n));
    taps.hi.resize(static_cast<std::size_t>(dst_n));
    taps.frac.resize(static_cast<std::size_t>(dst_n));
    for (int o = 0; o < dst_n; ++o) {
        double u = ((o + 0.5) * target) / src_spacing - 0.5;
        u = std::clamp(u, 0.0, static_cast<double>(src_n - 1));
        const int i0 = static_cast<int>(std::floor(u));
        const int i1 = std::min(i0 + 1, src_n - 1);
        taps.lo[o] = i0;
        taps.hi[o] = i1;
        taps.frac[o] = u - i0;
    }
    return taps;
}

int nearest(const AxisTaps& taps, int o)
{
    return taps.frac[o] < 0.5 ? taps.lo[o] : taps.hi[o];
}

template <typename T, typename Sampler>
Volume<T> resample_with(const Volume<T>& volume, double target_mm, int workers, Sampler sample)
{
    const Geometry out_geom = isotropic_geometry(volume.geometry(), target_mm);
    std::array<AxisTaps, 3> taps;
    for (int a = 0; a < 3; ++a) {
        taps[a] = axis_taps(volume.dims()[a], volume.spacing()[a], out_geom.dims[a], target_mm);
    }
    Volume<T> out(out_geom);
    WorkerPool pool(resolve_workers(workers));
    pool.run(static_cast<std::size_t>(out_geom.dims[2]), [&](std::size_t kk) {
        const int k = static_cast<int>(kk);
        for (int j = 0; j < out_geom.dims[1]; ++j) {
            for (int i = 0; i < out_geom.dims[0]; ++i) {
                out(i, j, k) = sample(taps, i, j, k);
            }
        }
    });
    return out;
}

} // namespace

Geometry isotropic_geometry(const Geometry& source, double target_mm)
{
    source.validate();
    if (!(target_mm > 0.0) || !std::isfinite(target_mm)) {
        throw parameter_error("resample target spacing must be > 0");
    }
    Geometry out;
    for (int a = 0; a < 3; ++a) {
        const double n = std::round(source.dims[a] * source.spacing[a] / target_mm);
        if (n < 1.0) {
            throw parameter_error("degenerate resample target " + std::to_string(target_mm) + " mm: axis " +
                                  std::to_string(a) + " would have 0 voxels");
        }
        out.dims[a] = std::max(1, static_cast<int>(n));
        out.spacing[a] = target_mm;
        out.origin[a] = source.origin[a] + (target_mm - source.spacing[a]) / 2.0;
    }
    return out;
}

ScalarVolume resample_isotropic(const ScalarVolume& volume, double target_mm, Interpolation interp, int workers)
{
    if (interp == Interpolation::Nearest) {
        return resample_with(volume, target_mm, workers, [&](const std::array<AxisTaps, 3>& t, int i, int j, int k) {
            return volume(nearest(t[0], i), nearest(t[1], j), nearest(t[2], k));
        });
    }
    return resample_with(volume, target_mm, workers, [&](const std::array<AxisTaps, 3>& t, int i, int j, int k) {
        const int x0 = t[0].lo[i], x1 = t[0].hi[i];
        const int y0 = t[1].lo[j], y1 = t[1].hi[j];
        const int z0 = t[2].lo[k], z1 = t[2].hi[k];
        const double fx = t[0].frac[i], fy = t[1].frac[j], fz = t[2].frac[k];
        auto lerp = [](double a, double b, double f) { return a + (b - a) * f; };
        const double c00 = lerp(volume(x0, y0, z0), volume(x1, y0, z0), fx);
        const double c10 = lerp(volume(x0, y1, z0), volume(x1, y1, z0), fx);
        const double c01 = lerp(volume(x0, y0, z1), volume(x1, y0, z1), fx);
        const double c11 = lerp(volume(x0, y1, z1), volume(x1, y1, z1), fx);
        const double c0 = lerp(c00, c10, fy);
        const double c1 = lerp(c01, c11, fy);
        return static_cast<float>(lerp(c0, c1, fz));
    });
}

LabelVolume resample_labels(const LabelVolume& volume, double target_mm, int workers)
{
    return resample_with(volume, target_mm, workers, [&](const std::array<AxisTaps, 3>& t, int i, int j, int k) {
        return volume(nearest(t[0], i), nearest(t[1], j), nearest(t[2], k));
    });
}

} // namespace growcut
