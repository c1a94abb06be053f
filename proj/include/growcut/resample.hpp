#pragma once

#include "growcut/volume.hpp"

namespace growcut {

enum class Interpolation { Trilinear, Nearest };

/// Output geometry for an isotropic target spacing. Each dim is
/// round-half-away(dim * spacing / target); a dim that rounds to zero is a
/// degenerate target. Output voxels tile the same physical extent, so the
/// origin shifts by (target - spacing) / 2.
Geometry isotropic_geometry(const Geometry& source, double target_mm);

/// Samples at output voxel centers; out-of-range coordinates clamp to the
/// edge voxel. `workers` splits output z-slabs and never changes the result.
ScalarVolume resample_isotropic(const ScalarVolume& volume, double target_mm,
                                Interpolation interp = Interpolation::Trilinear, int workers = 1);

/// Nearest-neighbour resampling with the same geometry rule; never invents labels.
LabelVolume resample_labels(const LabelVolume& volume, double target_mm, int workers = 1);

} // namespace growcut
