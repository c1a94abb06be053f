#include "growcut/strokes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace growcut::strokes {
namespace {

Error stroke_error(std::size_t index, const std::string& what)
{
    return validation_error("stroke " + std::to_string(index) + ": " + what);
}

// Squared distance from point w (relative to segment start) to the segment
// with direction d, compared against r^2 without dividing, so integer inputs
// are decided exactly.
bool within(double wx, double wy, double dx, double dy, double r2)
{
    const double dd = dx * dx + dy * dy;
    const double wd = wx * dx + wy * dy;
    if (dd == 0.0 || wd <= 0.0) return wx * wx + wy * wy <= r2;
    if (wd >= dd) {
        const double ex = wx - dx, ey = wy - dy;
        return ex * ex + ey * ey <= r2;
    }
    const double cross = wx * dy - wy * dx;
    return cross * cross <= r2 * dd;
}

} // namespace

StrokeFile parse(const nlohmann::json& doc)
{
    if (!doc.is_object()) throw validation_error("stroke document must be a JSON object");
    StrokeFile file;
    if (doc.contains("dims") && !doc["dims"].is_null()) {
        const auto& d = doc["dims"];
        if (!d.is_array() || d.size() != 3 || !d[0].is_number_integer() || !d[1].is_number_integer() ||
            !d[2].is_number_integer()) {
            throw validation_error("\"dims\" must be three integers");
        }
        file.dims = Index3{d[0].get<int>(), d[1].get<int>(), d[2].get<int>()};
    }
    if (!doc.contains("strokes") || !doc["strokes"].is_array()) {
        throw validation_error("\"strokes\" must be an array");
    }
    const auto& list = doc["strokes"];
    for (std::size_t s = 0; s < list.size(); ++s) {
        const auto& js = list[s];
        if (!js.is_object()) throw stroke_error(s, "must be an object");
        Stroke st;
        if (!js.contains("label") || !js["label"].is_number_integer()) throw stroke_error(s, "missing integer \"label\"");
        const int label = js["label"].get<int>();
        if (label != 1 && label != 2) throw stroke_error(s, "label must be 1 or 2");
        st.label = static_cast<Label>(label);
        if (!js.contains("axis") || !js["axis"].is_string()) throw stroke_error(s, "missing \"axis\"");
        const auto axis = parse_axis(js["axis"].get<std::string>());
        if (!axis) throw stroke_error(s, "axis must be axial, sagittal or coronal");
        st.axis = *axis;
        if (!js.contains("slice_index") || !js["slice_index"].is_number_integer()) {
            throw stroke_error(s, "missing integer \"slice_index\"");
        }
        st.slice_index = js["slice_index"].get<int>();
        if (js.contains("brush_radius_voxels")) {
            if (!js["brush_radius_voxels"].is_number()) throw stroke_error(s, "brush_radius_voxels must be a number");
            st.brush_radius_voxels = js["brush_radius_voxels"].get<double>();
        }
        if (!js.contains("polyline") || !js["polyline"].is_array()) throw stroke_error(s, "missing \"polyline\"");
        for (const auto& pt : js["polyline"]) {
            if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
                throw stroke_error(s, "polyline points must be [u, v] pairs");
            }
            st.polyline.push_back({pt[0].get<double>(), pt[1].get<double>()});
        }
        file.strokes.push_back(std::move(st));
    }
    return file;
}

nlohmann::json to_json(const StrokeFile& file)
{
    nlohmann::json doc;
    if (file.dims) doc["dims"] = *file.dims;
    doc["strokes"] = nlohmann::json::array();
    for (const Stroke& st : file.strokes) {
        nlohmann::json poly = nlohmann::json::array();
        for (const auto& p : st.polyline) poly.push_back({p[0], p[1]});
        doc["strokes"].push_back({{"label", st.label},
                                  {"axis", std::string(axis_name(st.axis))},
                                  {"slice_index", st.slice_index},
                                  {"brush_radius_voxels", st.brush_radius_voxels},
                                  {"polyline", poly}});
    }
    return doc;
}

void validate(const StrokeFile& file, const Geometry& geometry)
{
    if (file.dims && *file.dims != geometry.dims) {
        throw validation_error("stroke file dims do not match the volume");
    }
    for (std::size_t s = 0; s < file.strokes.size(); ++s) {
        const Stroke& st = file.strokes[s];
        if (st.label != kForeground && st.label != kBackground) throw stroke_error(s, "label must be 1 or 2");
        if (!(st.brush_radius_voxels >= 0.0) || !std::isfinite(st.brush_radius_voxels)) {
            throw stroke_error(s, "brush radius must be >= 0");
        }
        const int axis = fixed_grid_axis(st.axis);
        if (st.slice_index < 0 || st.slice_index >= geometry.dims[axis]) {
            throw stroke_error(s, "slice_index " + std::to_string(st.slice_index) + " out of range");
        }
        if (st.polyline.empty()) throw stroke_error(s, "polyline is empty");
        const auto [w, h] = slice_extent(geometry.dims, st.axis);
        for (std::size_t p = 0; p < st.polyline.size(); ++p) {
            const auto [u, v] = st.polyline[p];
            if (!(u >= 0.0 && u <= w - 1 && v >= 0.0 && v <= h - 1)) {
                throw stroke_error(s, "point " + std::to_string(p) + " lies outside the slice");
            }
        }
    }
}

void rasterize_into(LabelVolume& seeds, const StrokeFile& file)
{
    validate(file, seeds.geometry());
    for (const Stroke& st : file.strokes) {
        const auto [w, h] = slice_extent(seeds.dims(), st.axis);
        const SlicePlane plane{st.axis, st.slice_index};
        const double r = st.brush_radius_voxels;
        const double r2 = r * r;
        // A single point is a zero-length segment.
        const std::size_t segments = std::max<std::size_t>(1, st.polyline.size() - 1);
        for (std::size_t s = 0; s < segments; ++s) {
            const auto a = st.polyline[s];
            const auto b = st.polyline[std::min(s + 1, st.polyline.size() - 1)];
            const int u0 = std::max(0, static_cast<int>(std::floor(std::min(a[0], b[0]) - r)));
            const int u1 = std::min(w - 1, static_cast<int>(std::ceil(std::max(a[0], b[0]) + r)));
            const int v0 = std::max(0, static_cast<int>(std::floor(std::min(a[1], b[1]) - r)));
            const int v1 = std::min(h - 1, static_cast<int>(std::ceil(std::max(a[1], b[1]) + r)));
            for (int v = v0; v <= v1; ++v) {
                for (int u = u0; u <= u1; ++u) {
                    if (within(u - a[0], v - a[1], b[0] - a[0], b[1] - a[1], r2)) {
                        const Index3 g = plane_to_grid(plane, u, v);
                        seeds(g[0], g[1], g[2]) = st.label;
                    }
                }
            }
        }
    }
}

LabelVolume rasterize(const StrokeFile& file, const Geometry& geometry)
{
    LabelVolume seeds(geometry);
    rasterize_into(seeds, file);
    return seeds;
}

} // namespace growcut::strokes
