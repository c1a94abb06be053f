#include "growcut/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "growcut/parallel.hpp"

namespace growcut {

Roi compute_roi(const LabelVolume& seeds, double margin_fraction)
{
    if (!(margin_fraction >= 0.0 && margin_fraction <= 1.0)) {
        throw parameter_error("margin fraction must be in [0, 1]");
    }
    const Geometry& g = seeds.geometry();
    Index3 lo{g.dims[0], g.dims[1], g.dims[2]};
    Index3 hi{-1, -1, -1};
    for (int k = 0; k < g.dims[2]; ++k) {
        for (int j = 0; j < g.dims[1]; ++j) {
            for (int i = 0; i < g.dims[0]; ++i) {
                if (seeds(i, j, k) == kUnlabeled) continue;
                lo = {std::min(lo[0], i), std::min(lo[1], j), std::min(lo[2], k)};
                hi = {std::max(hi[0], i), std::max(hi[1], j), std::max(hi[2], k)};
            }
        }
    }
    if (hi[0] < 0) {
        throw Error(Error::Kind::NoSeeds, "seed volume contains no labeled voxels");
    }
    Roi roi;
    for (int a = 0; a < 3; ++a) {
        const int extent = hi[a] - lo[a] + 1;
        // The epsilon keeps exact products such as 0.05 * 20 from rounding up.
        const int margin = std::max(1, static_cast<int>(std::ceil(margin_fraction * extent - 1e-9)));
        roi.min[a] = std::max(0, lo[a] - margin);
        roi.max[a] = std::min(g.dims[a] - 1, hi[a] + margin);
    }
    return roi;
}

void GrowCutConfig::validate() const
{
    if (!(margin_fraction >= 0.0 && margin_fraction <= 1.0)) {
        throw parameter_error("margin fraction must be in [0, 1], got " + std::to_string(margin_fraction));
    }
    if (connectivity != 6 && connectivity != 26) {
        throw parameter_error("connectivity must be 6 or 26, got " + std::to_string(connectivity));
    }
    if (max_iterations < 1) {
        throw parameter_error("max iterations must be >= 1");
    }
    if (parallel_workers < 0) {
        throw parameter_error("worker count must be >= 0 (0 = auto)");
    }
}

GrowCutAutomaton::GrowCutAutomaton(const ScalarVolume& image, const LabelVolume& seeds, const GrowCutConfig& config)
    : geometry_(image.geometry()), config_(config)
{
    config_.validate();
    require_same_dims(image.geometry(), seeds.geometry(), "growcut image/seeds");
    roi_ = compute_roi(seeds, config_.margin_fraction);
    if (count_label(seeds, kForeground) == 0) {
        throw Error(Error::Kind::NoSeeds, "no foreground (label 1) seeds");
    }
    for (int a = 0; a < 3; ++a) roi_dims_[a] = roi_.extent(a);

    const std::size_t n = roi_.voxel_count();
    if (n > std::numeric_limits<std::uint32_t>::max()) {
        throw parameter_error("ROI too large");
    }
    intensity_.resize(n);
    labels_.resize(n);
    strengths_.resize(n);
    float lo = std::numeric_limits<float>::infinity();
    float hi = -std::numeric_limits<float>::infinity();
    std::size_t p = 0;
    for (int k = roi_.min[2]; k <= roi_.max[2]; ++k) {
        for (int j = roi_.min[1]; j <= roi_.max[1]; ++j) {
            for (int i = roi_.min[0]; i <= roi_.max[0]; ++i, ++p) {
                const float c = image(i, j, k);
                intensity_[p] = c;
                lo = std::min(lo, c);
                hi = std::max(hi, c);
                const Label l = seeds(i, j, k);
                labels_[p] = l;
                strengths_[p] = l == kUnlabeled ? 0.0 : 1.0;
            }
        }
    }
    max_diff_ = static_cast<double>(hi) - static_cast<double>(lo);

    for (int dk = -1; dk <= 1; ++dk) {
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                const int manhattan = std::abs(di) + std::abs(dj) + std::abs(dk);
                if (manhattan == 0 || (config_.connectivity == 6 && manhattan != 1)) continue;
                const std::ptrdiff_t offset =
                    di + static_cast<std::ptrdiff_t>(roi_dims_[0]) * (dj + static_cast<std::ptrdiff_t>(roi_dims_[1]) * dk);
                neighbors_.push_back({di, dj, dk, offset});
            }
        }
    }
    // (dk, dj, di) loop order already yields ascending linear offsets, which
    // the tie-break relies on.

    pool_ = std::make_unique<WorkerPool>(resolve_workers(config_.parallel_workers));
    full_sweep_ = true;
    active_flag_.assign(n, 0);
}

GrowCutAutomaton::~GrowCutAutomaton() = default;

std::size_t GrowCutAutomaton::active_count() const noexcept
{
    return full_sweep_ ? labels_.size() : active_.size();
}

Index3 GrowCutAutomaton::global_index(std::size_t local) const noexcept
{
    const auto rx = static_cast<std::size_t>(roi_dims_[0]);
    const auto ry = static_cast<std::size_t>(roi_dims_[1]);
    return {roi_.min[0] + static_cast<int>(local % rx), roi_.min[1] + static_cast<int>((local / rx) % ry),
            roi_.min[2] + static_cast<int>(local / (rx * ry))};
}

void GrowCutAutomaton::evaluate(std::size_t p, std::vector<Update>& out) const
{
    const auto rx = static_cast<std::size_t>(roi_dims_[0]);
    const auto ry = static_cast<std::size_t>(roi_dims_[1]);
    const int li = static_cast<int>(p % rx);
    const int lj = static_cast<int>((p / rx) % ry);
    const int lk = static_cast<int>(p / (rx * ry));
    const double cp = intensity_[p];

    double best = -1.0;
    Label best_label = kUnlabeled;
    for (const Neighbor& n : neighbors_) {
        const int qi = li + n.di, qj = lj + n.dj, qk = lk + n.dk;
        if (qi < 0 || qj < 0 || qk < 0 || qi >= roi_dims_[0] || qj >= roi_dims_[1] || qk >= roi_dims_[2]) continue;
        const std::size_t q = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(p) + n.offset);
        const Label lq = labels_[q];
        if (lq == kUnlabeled) continue;
        const double f = strengths_[q] * attack_strength(std::abs(cp - static_cast<double>(intensity_[q])), max_diff_);
        // Neighbours arrive in ascending index order, so on equal force and
        // label the earlier (smaller-index) attacker is kept.
        if (f > best || (f == best && lq < best_label)) {
            best = f;
            best_label = lq;
        }
    }
    if (best > strengths_[p]) {
        out.push_back({static_cast<std::uint32_t>(p), best_label, best});
    }
}

std::size_t GrowCutAutomaton::step()
{
    const bool sweep_all = full_sweep_ || !config_.track_saturation;
    const std::size_t n = sweep_all ? labels_.size() : active_.size();
    const std::size_t tasks = std::min<std::size_t>(n, static_cast<std::size_t>(pool_->size()) * 4);
    task_updates_.resize(std::max<std::size_t>(tasks, 1));
    for (auto& u : task_updates_) u.clear();

    pool_->run(tasks, [&](std::size_t t) {
        const std::size_t begin = n * t / tasks;
        const std::size_t end = n * (t + 1) / tasks;
        auto& out = task_updates_[t];
        for (std::size_t x = begin; x < end; ++x) {
            evaluate(sweep_all ? x : active_[x], out);
        }
    });

    // Commit after every read of the pre-step state is done.
    std::size_t changed = 0;
    for (const auto& updates : task_updates_) {
        for (const Update& u : updates) {
            labels_[u.index] = u.label;
            strengths_[u.index] = u.strength;
        }
        changed += updates.size();
    }
    ++iteration_;
    if (config_.track_saturation) {
        rebuild_active(task_updates_);
    }
    return changed;
}

void GrowCutAutomaton::rebuild_active(const std::vector<std::vector<Update>>& updates)
{
    active_.clear();
    for (const auto& list : updates) {
        for (const Update& u : list) {
            const std::size_t p = u.index;
            const auto rx = static_cast<std::size_t>(roi_dims_[0]);
            const auto ry = static_cast<std::size_t>(roi_dims_[1]);
            const int li = static_cast<int>(p % rx);
            const int lj = static_cast<int>((p / rx) % ry);
            const int lk = static_cast<int>(p / (rx * ry));
            for (const Neighbor& nb : neighbors_) {
                const int qi = li + nb.di, qj = lj + nb.dj, qk = lk + nb.dk;
                if (qi < 0 || qj < 0 || qk < 0 || qi >= roi_dims_[0] || qj >= roi_dims_[1] || qk >= roi_dims_[2]) {
                    continue;
                }
                const auto q = static_cast<std::uint32_t>(static_cast<std::ptrdiff_t>(p) + nb.offset);
                if (!active_flag_[q]) {
                    active_flag_[q] = 1;
                    active_.push_back(q);
                }
            }
        }
    }
    for (std::uint32_t q : active_) active_flag_[q] = 0;
    std::sort(active_.begin(), active_.end());
    full_sweep_ = false;
}

LabelVolume GrowCutAutomaton::mask() const
{
    LabelVolume out(geometry_);
    std::size_t p = 0;
    for (int k = roi_.min[2]; k <= roi_.max[2]; ++k) {
        for (int j = roi_.min[1]; j <= roi_.max[1]; ++j) {
            for (int i = roi_.min[0]; i <= roi_.max[0]; ++i, ++p) {
                out(i, j, k) = labels_[p];
            }
        }
    }
    return out;
}

SegmentationResult run_growcut(const ScalarVolume& image, const LabelVolume& seeds, const GrowCutConfig& config)
{
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    GrowCutAutomaton automaton(image, seeds, config);

    SegmentationResult result;
    result.roi = automaton.roi();
    while (automaton.iteration() < config.max_iterations) {
        const std::size_t changed = automaton.step();
        result.changed_per_iteration.push_back(changed);
        if (changed == 0) {
            result.converged = true;
            break;
        }
        if (config.time_limit && clock::now() - start > *config.time_limit) {
            result.timed_out = true;
            break;
        }
    }
    result.iterations_run = automaton.iteration();
    result.mask = automaton.mask();
    result.wall_time_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    return result;
}

LabelVolume sphere_seed(const Index3& center, double r_fg, double r_bg_inner, double r_bg_outer,
                        const Geometry& geometry)
{
    if (!(r_fg > 0.0 && r_fg < r_bg_inner && r_bg_inner < r_bg_outer)) {
        throw parameter_error("sphere seed radii must satisfy 0 < r_fg < r_bg_inner < r_bg_outer");
    }
    LabelVolume seeds(geometry);
    const int reach = static_cast<int>(std::ceil(r_bg_outer));
    const double fg2 = r_fg * r_fg;
    const double in2 = r_bg_inner * r_bg_inner;
    const double out2 = r_bg_outer * r_bg_outer;
    std::size_t fg_count = 0;
    for (int k = std::max(0, center[2] - reach); k <= std::min(geometry.dims[2] - 1, center[2] + reach); ++k) {
        for (int j = std::max(0, center[1] - reach); j <= std::min(geometry.dims[1] - 1, center[1] + reach); ++j) {
            for (int i = std::max(0, center[0] - reach); i <= std::min(geometry.dims[0] - 1, center[0] + reach); ++i) {
                const double di = i - center[0], dj = j - center[1], dk = k - center[2];
                const double d2 = di * di + dj * dj + dk * dk;
                if (d2 <= fg2) {
                    seeds(i, j, k) = kForeground;
                    ++fg_count;
                } else if (d2 >= in2 && d2 <= out2) {
                    seeds(i, j, k) = kBackground;
                }
            }
        }
    }
    if (fg_count == 0) {
        throw parameter_error("foreground sphere does not intersect the volume");
    }
    return seeds;
}

} // namespace growcut
