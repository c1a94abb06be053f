#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "growcut/volume.hpp"

namespace growcut {

class WorkerPool;

/// Inclusive voxel-index box.
struct Roi {
    Index3 min{0, 0, 0};
    Index3 max{0, 0, 0};

    int extent(int axis) const noexcept { return max[axis] - min[axis] + 1; }
    std::size_t voxel_count() const noexcept
    {
        return static_cast<std::size_t>(extent(0)) * static_cast<std::size_t>(extent(1)) *
               static_cast<std::size_t>(extent(2));
    }
    bool contains(int i, int j, int k) const noexcept
    {
        return i >= min[0] && i <= max[0] && j >= min[1] && j <= max[1] && k >= min[2] && k <= max[2];
    }
    bool operator==(const Roi&) const = default;
};

/// Bounding box of all nonzero seeds, grown on each side of each axis by
/// max(1, ceil(margin_fraction * extent)) voxels and clamped to the volume.
/// The box of the seeds' convex hull equals the box of the seeds.
Roi compute_roi(const LabelVolume& seeds, double margin_fraction);

/// Similarity-weighted attack factor g = 1 - delta / max_diff, in [0, 1].
/// A uniform ROI (max_diff == 0) attacks at full strength.
inline double attack_strength(double delta, double max_diff) noexcept
{
    if (!(max_diff > 0.0)) {
        return 1.0;
    }
    const double g = 1.0 - delta / max_diff;
    return g < 0.0 ? 0.0 : (g > 1.0 ? 1.0 : g);
}

struct GrowCutConfig {
    double margin_fraction = 0.05;
    int connectivity = 26;       // 6 or 26
    int max_iterations = 2000;
    int parallel_workers = 0;    // 0 = hardware concurrency
    /// Skip voxels none of whose neighbours changed in the previous step.
    /// Disabling it re-evaluates every ROI voxel each step; results are identical.
    bool track_saturation = true;
    std::optional<std::chrono::milliseconds> time_limit;

    void validate() const;
};

/// The cellular automaton restricted to its ROI. Each `step()` is a
/// synchronous update: every evaluated voxel reads only the pre-step state,
/// and all changes are committed after the whole step finished. Per-voxel
/// results are pure functions of the pre-step state, so any split of the
/// work across threads gives bit-identical output.
class GrowCutAutomaton {
public:
    GrowCutAutomaton(const ScalarVolume& image, const LabelVolume& seeds, const GrowCutConfig& config);
    ~GrowCutAutomaton();

    GrowCutAutomaton(const GrowCutAutomaton&) = delete;
    GrowCutAutomaton& operator=(const GrowCutAutomaton&) = delete;

    /// Runs one synchronous update and returns how many voxels changed (label or strength).
    std::size_t step();

    const Roi& roi() const noexcept { return roi_; }
    double max_diff() const noexcept { return max_diff_; }
    int iteration() const noexcept { return iteration_; }
    /// Voxels that will be evaluated by the next step.
    std::size_t active_count() const noexcept;

    /// ROI-local state, x-fastest over the ROI box.
    std::span<const Label> labels() const noexcept { return labels_; }
    std::span<const double> strengths() const noexcept { return strengths_; }

    std::size_t local_index(int i, int j, int k) const noexcept
    {
        return static_cast<std::size_t>(i - roi_.min[0]) +
               static_cast<std::size_t>(roi_dims_[0]) *
                   (static_cast<std::size_t>(j - roi_.min[1]) +
                    static_cast<std::size_t>(roi_dims_[1]) * static_cast<std::size_t>(k - roi_.min[2]));
    }
    Index3 global_index(std::size_t local) const noexcept;

    /// Full-volume labels; zero outside the ROI.
    LabelVolume mask() const;

private:
    struct Update {
        std::uint32_t index;
        Label label;
        double strength;
    };

    void evaluate(std::size_t local, std::vector<Update>& out) const;
    void rebuild_active(const std::vector<std::vector<Update>>& updates);

    Geometry geometry_;
    Roi roi_;
    Index3 roi_dims_{};
    GrowCutConfig config_;
    double max_diff_ = 0.0;
    int iteration_ = 0;

    std::vector<float> intensity_;
    std::vector<Label> labels_;
    std::vector<double> strengths_;

    struct Neighbor {
        int di, dj, dk;
        std::ptrdiff_t offset;
    };
    std::vector<Neighbor> neighbors_;

    bool full_sweep_ = true;
    std::vector<std::uint32_t> active_;
    std::vector<std::uint8_t> active_flag_;
    std::vector<std::vector<Update>> task_updates_;
    std::unique_ptr<WorkerPool> pool_;
};

struct SegmentationResult {
    LabelVolume mask;
    Roi roi;
    int iterations_run = 0;
    std::vector<std::size_t> changed_per_iteration;
    bool converged = false;
    bool timed_out = false;
    double wall_time_ms = 0.0;
};

/// Iterates the automaton until a step changes nothing (converged) or the
/// iteration / time budget runs out.
SegmentationResult run_growcut(const ScalarVolume& image, const LabelVolume& seeds, const GrowCutConfig& config);

/// Single-point initialization: label 1 within r_fg of `center`, label 2 in
/// the shell r_bg_inner <= d <= r_bg_outer, 0 elsewhere. Distances are
/// Euclidean in voxel-index space; the spheres are clipped to the volume.
LabelVolume sphere_seed(const Index3& center, double r_fg, double r_bg_inner, double r_bg_outer,
                        const Geometry& geometry);

} // namespace growcut
