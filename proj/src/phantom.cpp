#include "growcut/phantom.hpp"

#include <cmath>
#include <random>
#include <string>

namespace growcut {

Vec3 phantom_center(const EllipsoidPhantomSpec& spec)
{
    if (spec.center) return *spec.center;
    return {static_cast<double>(spec.dims[0] / 2), static_cast<double>(spec.dims[1] / 2),
            static_cast<double>(spec.dims[2] / 2)};
}

Phantom make_ellipsoid_phantom(const EllipsoidPhantomSpec& spec)
{
    Geometry g;
    g.dims = spec.dims;
    g.spacing = spec.spacing;
    g.validate();
    const Vec3 c = phantom_center(spec);
    for (int a = 0; a < 3; ++a) {
        if (!(spec.semi_axes[a] > 0.0)) {
            throw parameter_error("degenerate ellipsoid: semi-axes must be > 0");
        }
        if (c[a] - spec.semi_axes[a] < 0.0 || c[a] + spec.semi_axes[a] > spec.dims[a] - 1) {
            throw parameter_error("ellipsoid semi-axis " + std::to_string(spec.semi_axes[a]) + " on axis " +
                                  std::to_string(a) + " does not fit in the volume");
        }
    }
    if (!(spec.noise_sigma >= 0.0)) throw parameter_error("noise sigma must be >= 0");

    Phantom ph{ScalarVolume(g), LabelVolume(g)};
    std::mt19937_64 rng(spec.rng_seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);
    for (int k = 0; k < g.dims[2]; ++k) {
        for (int j = 0; j < g.dims[1]; ++j) {
            for (int i = 0; i < g.dims[0]; ++i) {
                const double x = (i - c[0]) / spec.semi_axes[0];
                const double y = (j - c[1]) / spec.semi_axes[1];
                const double z = (k - c[2]) / spec.semi_axes[2];
                const bool inside = x * x + y * y + z * z <= 1.0;
                double v = inside ? spec.inside : spec.outside;
                if (spec.noise_sigma > 0.0) v += noise(rng);
                ph.image(i, j, k) = static_cast<float>(v);
                ph.truth(i, j, k) = inside ? kForeground : kUnlabeled;
            }
        }
    }
    return ph;
}

} // namespace growcut
