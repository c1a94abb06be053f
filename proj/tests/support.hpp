#pragma once

// Shared fixtures and independent reference implementations for the tests.
// Everything here is deliberately naive: direct definitions, no shared code
// paths with the library beyond the volume container.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "growcut/engine.hpp"
#include "growcut/phantom.hpp"
#include "growcut/volume.hpp"

namespace testsupport {

using namespace growcut;

class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("growcut-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
}

inline Geometry cube(int n) { return Geometry{{n, n, n}, {1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}}; }

inline LabelVolume random_mask(std::mt19937_64& rng, const Index3& dims, double density, Label label = kForeground)
{
    LabelVolume m(Geometry{dims, {1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}}, kUnlabeled);
    std::bernoulli_distribution on(density);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (on(rng)) m[i] = label;
    }
    return m;
}

inline Index3 random_dims(std::mt19937_64& rng, int lo, int hi)
{
    std::uniform_int_distribution<int> d(lo, hi);
    return {d(rng), d(rng), d(rng)};
}

// Smooth random image: a few Gaussian blobs over a noisy floor.
inline ScalarVolume random_image(std::mt19937_64& rng, const Index3& dims)
{
    ScalarVolume img(Geometry{dims, {1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}}, 0.0f);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    struct Blob {
        double x, y, z, r, a;
    };
    std::vector<Blob> blobs;
    const int nb = 1 + static_cast<int>(u(rng) * 4);
    for (int b = 0; b < nb; ++b) {
        blobs.push_back({u(rng) * dims[0], u(rng) * dims[1], u(rng) * dims[2], 1.5 + u(rng) * 4, 20 + u(rng) * 100});
    }
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i) {
                double v = u(rng) * 10.0;
                for (const auto& b : blobs) {
                    const double d2 = (i - b.x) * (i - b.x) + (j - b.y) * (j - b.y) + (k - b.z) * (k - b.z);
                    v += b.a * std::exp(-d2 / (2 * b.r * b.r));
                }
                img(i, j, k) = static_cast<float>(v);
            }
    return img;
}

// Sparse random seeds; always contains at least one foreground voxel.
inline LabelVolume random_seeds(std::mt19937_64& rng, const Index3& dims, int max_labels = 2)
{
    LabelVolume s(Geometry{dims, {1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}}, kUnlabeled);
    std::uniform_int_distribution<int> di(0, dims[0] - 1), dj(0, dims[1] - 1), dk(0, dims[2] - 1);
    std::uniform_int_distribution<int> count(1, 12);
    std::uniform_int_distribution<int> lab(1, max_labels);
    s(di(rng), dj(rng), dk(rng)) = kForeground;
    const int n = count(rng);
    for (int t = 0; t < n; ++t) s(di(rng), dj(rng), dk(rng)) = static_cast<Label>(lab(rng));
    return s;
}

struct RandomPhantomCase {
    Phantom phantom;
    LabelVolume seeds;
};

// 64^3 ellipsoid with randomized axes, center and noise, seeded by a sphere
// and shell around the center.
inline RandomPhantomCase random_phantom(std::uint64_t seed, int n = 64)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> axis(8.0, 18.0), shift(-4.0, 4.0), noise(2.0, 8.0);
    EllipsoidPhantomSpec spec;
    spec.dims = {n, n, n};
    spec.semi_axes = {axis(rng), axis(rng), axis(rng)};
    spec.center = Vec3{std::round(n / 2 + shift(rng)), std::round(n / 2 + shift(rng)), std::round(n / 2 + shift(rng))};
    spec.noise_sigma = noise(rng);
    spec.rng_seed = seed;
    RandomPhantomCase c{make_ellipsoid_phantom(spec), {}};
    const Vec3 ctr = *spec.center;
    const double rmax = std::max({spec.semi_axes[0], spec.semi_axes[1], spec.semi_axes[2]});
    c.seeds = sphere_seed({static_cast<int>(ctr[0]), static_cast<int>(ctr[1]), static_cast<int>(ctr[2])}, 3.0,
                          rmax + 3.0, rmax + 6.0, c.phantom.image.geometry());
    return c;
}

// ---------------------------------------------------------------------------
// Oracles

inline std::vector<Index3> stencil(int connectivity)
{
    std::vector<Index3> out;
    for (int dk = -1; dk <= 1; ++dk)
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                const int m = std::abs(di) + std::abs(dj) + std::abs(dk);
                if (m == 0) continue;
                if (connectivity == 6 && m > 1) continue;
                if (connectivity == 18 && m > 2) continue;
                out.push_back({di, dj, dk});
            }
    return out;
}

inline LabelVolume oracle_dilate(const LabelVolume& m, int conn, Label label = kForeground)
{
    const auto d = m.dims();
    LabelVolume out(m.geometry(), kUnlabeled);
    const auto st = stencil(conn);
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                bool hit = m(i, j, k) == label;
                for (const auto& o : st) {
                    const int a = i + o[0], b = j + o[1], c = k + o[2];
                    if (a >= 0 && b >= 0 && c >= 0 && a < d[0] && b < d[1] && c < d[2] && m(a, b, c) == label) hit = true;
                }
                out(i, j, k) = hit ? 1 : 0;
            }
    return out;
}

inline LabelVolume oracle_erode(const LabelVolume& m, int conn, Label label = kForeground)
{
    const auto d = m.dims();
    LabelVolume out(m.geometry(), kUnlabeled);
    const auto st = stencil(conn);
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                bool keep = m(i, j, k) == label;
                for (const auto& o : st) {
                    const int a = i + o[0], b = j + o[1], c = k + o[2];
                    const bool inside = a >= 0 && b >= 0 && c >= 0 && a < d[0] && b < d[1] && c < d[2];
                    if (!inside || m(a, b, c) != label) keep = false;
                }
                out(i, j, k) = keep ? 1 : 0;
            }
    return out;
}

struct OracleComponents {
    std::vector<std::uint32_t> ids;
    std::vector<std::size_t> sizes;
};

// Depth-first flood fill started from each unvisited voxel in linear order.
inline OracleComponents oracle_components(const LabelVolume& m, int conn, Label label = kForeground)
{
    const auto d = m.dims();
    const auto& g = m.geometry();
    OracleComponents out{std::vector<std::uint32_t>(m.size(), 0), {}};
    const auto st = stencil(conn);
    std::vector<Index3> stack;
    for (std::size_t start = 0; start < m.size(); ++start) {
        if (m[start] != label || out.ids[start] != 0) continue;
        const auto id = static_cast<std::uint32_t>(out.sizes.size() + 1);
        out.sizes.push_back(0);
        stack.push_back(g.index_of(start));
        out.ids[start] = id;
        while (!stack.empty()) {
            const Index3 p = stack.back();
            stack.pop_back();
            ++out.sizes.back();
            for (const auto& o : st) {
                const int a = p[0] + o[0], b = p[1] + o[1], c = p[2] + o[2];
                if (a < 0 || b < 0 || c < 0 || a >= d[0] || b >= d[1] || c >= d[2]) continue;
                const auto q = g.linear(a, b, c);
                if (m[q] == label && out.ids[q] == 0) {
                    out.ids[q] = id;
                    stack.push_back({a, b, c});
                }
            }
        }
    }
    return out;
}

inline std::vector<Index3> voxels_of(const LabelVolume& m, Label label = kForeground)
{
    std::vector<Index3> out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == label) out.push_back(m.geometry().index_of(i));
    }
    return out;
}

inline double oracle_directed_hd2(const std::vector<Index3>& a, const std::vector<Index3>& b)
{
    double worst = 0.0;
    for (const auto& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : b) {
            const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
            best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        worst = std::max(worst, best);
    }
    return worst;
}

inline double oracle_hausdorff(const LabelVolume& a, const LabelVolume& r, Label label = kForeground)
{
    const auto va = voxels_of(a, label), vr = voxels_of(r, label);
    return std::sqrt(std::max(oracle_directed_hd2(va, vr), oracle_directed_hd2(vr, va)));
}

struct OracleCounts {
    std::size_t a = 0, r = 0, both = 0;
};

inline OracleCounts oracle_counts(const LabelVolume& a, const LabelVolume& r, Label label = kForeground)
{
    OracleCounts c;
    for (int k = 0; k < a.dims()[2]; ++k)
        for (int j = 0; j < a.dims()[1]; ++j)
            for (int i = 0; i < a.dims()[0]; ++i) {
                const bool x = a(i, j, k) == label, y = r(i, j, k) == label;
                c.a += x;
                c.r += y;
                c.both += x && y;
            }
    return c;
}

inline Roi oracle_roi(const LabelVolume& seeds, double margin_fraction)
{
    const auto d = seeds.dims();
    Index3 lo{d[0], d[1], d[2]}, hi{-1, -1, -1};
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                if (seeds(i, j, k) == 0) continue;
                const Index3 p{i, j, k};
                for (int a = 0; a < 3; ++a) {
                    lo[a] = std::min(lo[a], p[a]);
                    hi[a] = std::max(hi[a], p[a]);
                }
            }
    Roi roi;
    for (int a = 0; a < 3; ++a) {
        const int extent = hi[a] - lo[a] + 1;
        // Smallest integer m with m >= margin_fraction * extent, at least 1.
        int m = 0;
        while (m < margin_fraction * extent - 1e-9) ++m;
        m = std::max(1, m);
        roi.min[a] = std::max(0, lo[a] - m);
        roi.max[a] = std::min(d[a] - 1, hi[a] + m);
    }
    return roi;
}

struct OracleRun {
    LabelVolume mask;
    std::vector<std::size_t> changed;
    bool converged = false;
};

// Literal synchronous GrowCut over the ROI: every voxel considers every
// neighbour each generation, all updates computed from the previous state.
inline OracleRun oracle_growcut(const ScalarVolume& image, const LabelVolume& seeds, int connectivity = 26,
                                double margin = 0.05, int max_iterations = 2000)
{
    const Roi roi = oracle_roi(seeds, margin);
    const auto d = image.dims();
    const auto& g = image.geometry();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int k = roi.min[2]; k <= roi.max[2]; ++k)
        for (int j = roi.min[1]; j <= roi.max[1]; ++j)
            for (int i = roi.min[0]; i <= roi.max[0]; ++i) {
                lo = std::min(lo, static_cast<double>(image(i, j, k)));
                hi = std::max(hi, static_cast<double>(image(i, j, k)));
            }
    const double max_diff = hi - lo;
    std::vector<Label> lab(image.size(), 0);
    std::vector<double> th(image.size(), 0.0);
    for (int k = roi.min[2]; k <= roi.max[2]; ++k)
        for (int j = roi.min[1]; j <= roi.max[1]; ++j)
            for (int i = roi.min[0]; i <= roi.max[0]; ++i) {
                const auto p = g.linear(i, j, k);
                lab[p] = seeds[p];
                th[p] = seeds[p] != 0 ? 1.0 : 0.0;
            }
    const auto st = stencil(connectivity);
    OracleRun run{LabelVolume(g, kUnlabeled), {}, false};
    for (int it = 0; it < max_iterations; ++it) {
        auto nlab = lab;
        auto nth = th;
        std::size_t changed = 0;
        for (int k = roi.min[2]; k <= roi.max[2]; ++k)
            for (int j = roi.min[1]; j <= roi.max[1]; ++j)
                for (int i = roi.min[0]; i <= roi.max[0]; ++i) {
                    const auto p = g.linear(i, j, k);
                    double best = -1.0;
                    Label best_label = 0;
                    std::size_t best_q = 0;
                    for (const auto& o : st) {
                        const int a = i + o[0], b = j + o[1], c = k + o[2];
                        if (!roi.contains(a, b, c)) continue;
                        const auto q = g.linear(a, b, c);
                        if (lab[q] == 0) continue;
                        const double delta = std::abs(static_cast<double>(image[p]) - static_cast<double>(image[q]));
                        double gg = max_diff > 0.0 ? 1.0 - delta / max_diff : 1.0;
                        gg = std::clamp(gg, 0.0, 1.0);
                        const double f = th[q] * gg;
                        const bool better = f > best || (f == best && (lab[q] < best_label ||
                                                                       (lab[q] == best_label && q < best_q)));
                        if (better) {
                            best = f;
                            best_label = lab[q];
                            best_q = q;
                        }
                    }
                    if (best > th[p]) {
                        nlab[p] = best_label;
                        nth[p] = best;
                        ++changed;
                    }
                }
        lab.swap(nlab);
        th.swap(nth);
        run.changed.push_back(changed);
        if (changed == 0) {
            run.converged = true;
            break;
        }
    }
    (void)d;
    for (std::size_t p = 0; p < image.size(); ++p) run.mask[p] = lab[p];
    return run;
}

} // namespace testsupport
