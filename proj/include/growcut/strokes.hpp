#pragma once

#include <array>
#include <optional>
#include <vector>

#include "json.hpp"

#include "growcut/slice.hpp"
#include "growcut/volume.hpp"

namespace growcut::strokes {

/// A brush stroke painted on one cross-section; polyline points are in-plane
/// (u, v) voxel coordinates of that slice (see `Axis` for the layout).
struct Stroke {
    Label label = kForeground;
    Axis axis = Axis::Axial;
    int slice_index = 0;
    double brush_radius_voxels = 0.0;
    std::vector<std::array<double, 2>> polyline;
};

struct StrokeFile {
    std::optional<Index3> dims; // geometry echo, checked when present
    std::vector<Stroke> strokes;
};

/// Parses {"dims": [nx,ny,nz]?, "strokes": [{label, axis, slice_index,
/// brush_radius_voxels, polyline: [[u,v], ...]}, ...]}. Structural problems
/// are validation errors naming the stroke index.
StrokeFile parse(const nlohmann::json& doc);
nlohmann::json to_json(const StrokeFile& file);

/// Labels in {1, 2}, radius >= 0, non-empty polyline, slice and every
/// point inside the volume.
void validate(const StrokeFile& file, const Geometry& geometry);

/// Paints every stroke into `seeds` in order (later strokes overwrite). A
/// voxel is painted when its center lies within the brush radius of some
/// polyline segment, on the stroke's slice only. Validates first; on error
/// `seeds` is untouched.
void rasterize_into(LabelVolume& seeds, const StrokeFile& file);

LabelVolume rasterize(const StrokeFile& file, const Geometry& geometry);

} // namespace growcut::strokes
