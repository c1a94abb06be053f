#pragma once

#include <cstdint>
#include <optional>

#include "growcut/volume.hpp"

namespace growcut {

struct EllipsoidPhantomSpec {
    Index3 dims{64, 64, 64};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 semi_axes{20.0, 15.0, 15.0}; // voxels
    std::optional<Vec3> center;       // voxel index; default dims / 2 (integer division)
    float inside = 100.0f;
    float outside = 50.0f;
    double noise_sigma = 0.0;
    std::uint64_t rng_seed = 0;
};

struct Phantom {
    ScalarVolume image;
    LabelVolume truth; // 1 inside the ellipsoid, 0 outside
};

/// Voxel (i,j,k) is inside when sum(((x - c) / a)^2) <= 1. Noise is added in
/// linear voxel order from a generator seeded with `rng_seed`, so a fixed
/// spec always yields identical bytes.
Phantom make_ellipsoid_phantom(const EllipsoidPhantomSpec& spec);

Vec3 phantom_center(const EllipsoidPhantomSpec& spec);

} // namespace growcut
