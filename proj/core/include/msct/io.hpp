#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "msct/geometry.hpp"

namespace msct {

enum class Dtype { float32, float64 };

/// Flat key = value header written next to every raw array.
using Header = std::map<std::string, std::string>;

Header read_header(const std::filesystem::path& path);
void write_header(const Header& h, const std::filesystem::path& path);

/**
 * Images and sinograms are stored as `<stem>.raw` (little-endian, row-major)
 * plus `<stem>.hdr`. `path` may name either file or the bare stem.
 */
void write_image(const ImageGrid& img, const std::filesystem::path& path, Dtype dtype = Dtype::float32,
                 const std::string& units = "g/cm^3", const std::string& label = {});
ImageGrid read_image(const std::filesystem::path& path);

void write_sinogram(const Sinogram& s, const std::filesystem::path& path, Dtype dtype = Dtype::float32,
                    const std::string& units = "1");
Sinogram read_sinogram(const std::filesystem::path& path);

/// 16-bit binary PGM of `img` clipped to [lo, hi].
void write_preview(const ImageGrid& img, double lo, double hi, const std::filesystem::path& path);

} // namespace msct
