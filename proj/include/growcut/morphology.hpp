#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "growcut/volume.hpp"

namespace growcut::morphology {

/// Face (6), face+edge (18) or full (26) neighbourhood stencil.
struct StructuringElement {
    int connectivity = 6;

    void validate() const;
};

// All operations read the binary view `mask == label` and return a 0/1 mask.

/// Binary dilation repeated `iterations` times. Voxels beyond the volume are
/// absent (no wraparound).
LabelVolume dilate(const LabelVolume& mask, StructuringElement se, int iterations = 1, Label label = kForeground,
                   int workers = 1);

/// Binary erosion; neighbours beyond the volume count as background.
LabelVolume erode(const LabelVolume& mask, StructuringElement se, int iterations = 1, Label label = kForeground,
                  int workers = 1);

struct Components {
    /// Per-voxel component id, 0 for background. Ids start at 1 and are
    /// ordered by each component's smallest linear index.
    std::vector<std::uint32_t> ids;
    /// sizes[id - 1] is the voxel count of component `id`.
    std::vector<std::size_t> sizes;

    std::size_t count() const noexcept { return sizes.size(); }
};

Components connected_components(const LabelVolume& mask, int connectivity = 26, Label label = kForeground);

/// Keeps only the largest component (ties: smallest id). Empty stays empty.
LabelVolume remove_islands(const LabelVolume& mask, int connectivity = 26, Label label = kForeground);

/// One step of a post-edit pipeline.
struct PostOp {
    enum class Kind { Islands, Dilate, Erode };
    Kind kind = Kind::Islands;
    int iterations = 1;
    int connectivity = 26;

    bool operator==(const PostOp&) const = default;
};

/// Parses "islands,dilate:1,erode:1". Grammar per item:
/// islands[:conn] | dilate[:n[:conn]] | erode[:n[:conn]].
/// Islands default to 26-connectivity, dilate/erode to 6.
std::vector<PostOp> parse_post_ops(std::string_view spec);

/// islands(26), dilate(6) x1, erode(6) x1.
std::vector<PostOp> default_post_ops();

/// Applies the pipeline to the binary view of `label`; the result is 0/1.
LabelVolume apply_post_ops(const LabelVolume& mask, const std::vector<PostOp>& ops, Label label = kForeground,
                           int workers = 1);

} // namespace growcut::morphology
