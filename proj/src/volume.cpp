#include "growcut/volume.hpp"

#include <algorithm>
#include <string>

#include "growcut/slice.hpp"

namespace growcut {

void Geometry::validate() const
{
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 1) {
            throw parameter_error("volume dims must be >= 1, got " + std::to_string(dims[a]));
        }
        if (!(spacing[a] > 0.0)) {
            throw parameter_error("volume spacing must be > 0, got " + std::to_string(spacing[a]));
        }
    }
}

LabelVolume binary_view(const LabelVolume& mask, Label label)
{
    LabelVolume out(mask.geometry());
    const auto src = mask.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = src[i] == label ? Label{1} : Label{0};
    }
    return out;
}

std::size_t count_label(const LabelVolume& mask, Label label)
{
    const auto d = mask.data();
    return static_cast<std::size_t>(std::count(d.begin(), d.end(), label));
}

void require_same_dims(const Geometry& a, const Geometry& b, const char* context)
{
    if (a.dims != b.dims) {
        auto fmt = [](const Index3& d) {
            return std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" + std::to_string(d[2]);
        };
        throw shape_error(std::string(context) + ": geometry mismatch (" + fmt(a.dims) + " vs " + fmt(b.dims) + ")");
    }
}

std::optional<Axis> parse_axis(std::string_view name)
{
    if (name == "axial") return Axis::Axial;
    if (name == "sagittal") return Axis::Sagittal;
    if (name == "coronal") return Axis::Coronal;
    return std::nullopt;
}

std::string_view axis_name(Axis axis)
{
    switch (axis) {
    case Axis::Axial: return "axial";
    case Axis::Sagittal: return "sagittal";
    case Axis::Coronal: return "coronal";
    }
    return "axial";
}

int fixed_grid_axis(Axis axis)
{
    switch (axis) {
    case Axis::Axial: return 2;
    case Axis::Sagittal: return 0;
    case Axis::Coronal: return 1;
    }
    return 2;
}

std::pair<int, int> slice_extent(const Index3& dims, Axis axis)
{
    switch (axis) {
    case Axis::Axial: return {dims[0], dims[1]};
    case Axis::Sagittal: return {dims[1], dims[2]};
    case Axis::Coronal: return {dims[0], dims[2]};
    }
    return {dims[0], dims[1]};
}

Index3 plane_to_grid(const SlicePlane& plane, int u, int v)
{
    switch (plane.axis) {
    case Axis::Axial: return {u, v, plane.index};
    case Axis::Sagittal: return {plane.index, u, v};
    case Axis::Coronal: return {u, plane.index, v};
    }
    return {u, v, plane.index};
}

} // namespace growcut
