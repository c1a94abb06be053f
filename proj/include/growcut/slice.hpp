#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "growcut/volume.hpp"

namespace growcut {

/// Canonical cross-sections. Axial fixes z, sagittal fixes x, coronal fixes y.
/// In-plane order (u, v): axial (x, y), sagittal (y, z), coronal (x, z).
enum class Axis { Axial, Sagittal, Coronal };

std::optional<Axis> parse_axis(std::string_view name);
std::string_view axis_name(Axis axis);

/// Grid axis (0 = x, 1 = y, 2 = z) held fixed by a plane.
int fixed_grid_axis(Axis axis);

struct SlicePlane {
    Axis axis = Axis::Axial;
    int index = 0;
};

template <typename T>
struct Slice2D {
    int width = 0;
    int height = 0;
    std::vector<T> values; // values[v * width + u]

    const T& at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
};

/// Width and height of the plane for a given volume shape.
std::pair<int, int> slice_extent(const Index3& dims, Axis axis);

/// Maps in-plane (u, v) on `plane` to grid (i, j, k).
Index3 plane_to_grid(const SlicePlane& plane, int u, int v);

template <typename T>
Slice2D<T> extract_slice(const Volume<T>& volume, const SlicePlane& plane) {
    const Index3& dims = volume.dims();
    const int axis = fixed_grid_axis(plane.axis);
    if (plane.index < 0 || plane.index >= dims[axis]) {
        throw bounds_error("slice index " + std::to_string(plane.index) + " out of range [0, " +
                           std::to_string(dims[axis]) + ") for " + std::string(axis_name(plane.axis)));
    }
    const auto [w, h] = slice_extent(dims, plane.axis);
    Slice2D<T> out{w, h, std::vector<T>(static_cast<std::size_t>(w) * h)};
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const Index3 g = plane_to_grid(plane, u, v);
            out.values[static_cast<std::size_t>(v) * w + u] = volume(g[0], g[1], g[2]);
        }
    }
    return out;
}

} // namespace growcut
