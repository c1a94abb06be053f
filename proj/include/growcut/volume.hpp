#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "growcut/error.hpp"

namespace growcut {

using Index3 = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

/// Grid shape and physical placement shared by intensity and label volumes.
/// `origin` is the physical position of the center of voxel (0,0,0).
struct Geometry {
    Index3 dims{1, 1, 1};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};

    std::size_t voxel_count() const noexcept {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
               static_cast<std::size_t>(dims[2]);
    }

    /// x-fastest linear index: i + nx * (j + ny * k).
    std::size_t linear(int i, int j, int k) const noexcept {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
    }

    Index3 index_of(std::size_t linear_index) const noexcept {
        const auto nx = static_cast<std::size_t>(dims[0]);
        const auto ny = static_cast<std::size_t>(dims[1]);
        return {static_cast<int>(linear_index % nx), static_cast<int>((linear_index / nx) % ny),
                static_cast<int>(linear_index / (nx * ny))};
    }

    bool contains(int i, int j, int k) const noexcept {
        return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
    }

    double voxel_volume_mm3() const noexcept { return spacing[0] * spacing[1] * spacing[2]; }

    /// Throws a parameter error unless dims >= 1 and spacings > 0.
    void validate() const;

    bool operator==(const Geometry&) const = default;
};

/// Dense 3-D grid in x-fastest order. Value type; copies are deep.
template <typename T>
class Volume {
public:
    using value_type = T;

    Volume() = default;

    explicit Volume(Geometry geometry, T fill = T{})
        : geometry_(geometry), data_((geometry.validate(), geometry.voxel_count()), fill) {}

    Volume(Geometry geometry, std::vector<T> data) : geometry_(geometry), data_(std::move(data)) {
        geometry_.validate();
        if (data_.size() != geometry_.voxel_count()) {
            throw shape_error("volume data length does not match dims");
        }
    }

    const Geometry& geometry() const noexcept { return geometry_; }
    const Index3& dims() const noexcept { return geometry_.dims; }
    const Vec3& spacing() const noexcept { return geometry_.spacing; }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(int i, int j, int k) noexcept { return data_[geometry_.linear(i, j, k)]; }
    const T& operator()(int i, int j, int k) const noexcept { return data_[geometry_.linear(i, j, k)]; }
    T& operator[](std::size_t idx) noexcept { return data_[idx]; }
    const T& operator[](std::size_t idx) const noexcept { return data_[idx]; }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    const std::vector<T>& values() const noexcept { return data_; }

    bool operator==(const Volume&) const = default;

private:
    Geometry geometry_{};
    std::vector<T> data_{T{}};
};

using ScalarVolume = Volume<float>;
using Label = std::uint8_t;
using LabelVolume = Volume<Label>;

inline constexpr Label kUnlabeled = 0;
inline constexpr Label kForeground = 1;
inline constexpr Label kBackground = 2;

/// Binary view of one label: 1 where `mask == label`, 0 elsewhere.
LabelVolume binary_view(const LabelVolume& mask, Label label = kForeground);

std::size_t count_label(const LabelVolume& mask, Label label);

/// Throws a shape error when the two geometries differ in dims.
void require_same_dims(const Geometry& a, const Geometry& b, const char* context);

} // namespace growcut
