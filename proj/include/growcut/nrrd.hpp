#pragma once

#include <filesystem>
#include <variant>

#include "growcut/volume.hpp"

namespace growcut::nrrd {

/// A file's contents: uint8 files load as labels, every other pixel type
/// as float intensities.
using AnyVolume = std::variant<ScalarVolume, LabelVolume>;

/// Reads the supported NRRD subset: NRRD0001..NRRD0005, dimension 3,
/// raw or gzip encoding, attached data, diagonal space directions,
/// pixel types uint8 / int16 / uint16 / float32.
AnyVolume load(const std::filesystem::path& path);

/// Loads any supported file as intensities.
ScalarVolume load_scalar(const std::filesystem::path& path);

/// Loads a file as labels. Non-uint8 files are accepted when every value is
/// an integer in [0, 255].
LabelVolume load_labels(const std::filesystem::path& path);

/// Writes NRRD0004, raw, little-endian, attached data. Scalars as float,
/// labels as uint8.
void save(const ScalarVolume& volume, const std::filesystem::path& path);
void save(const LabelVolume& volume, const std::filesystem::path& path);

} // namespace growcut::nrrd
