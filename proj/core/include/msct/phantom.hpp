#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "msct/geometry.hpp"

namespace msct {

/// Ellipse contributing `density` (g/cm^3, may be negative) to one material image.
struct EllipseSpec {
    double cx = 0.0;
    double cy = 0.0;
    double a = 1.0;
    double b = 1.0;
    double angle = 0.0; ///< degrees, counter-clockwise
    std::size_t material = 0;
    double density = 0.0;

    bool contains(double x, double y) const noexcept;
};

struct Phantom {
    std::vector<EllipseSpec> ellipses;
    std::size_t materials = 0;
    std::vector<std::string> material_names;

    void validate() const;
};

/// One image per material; a pixel holds the sum of densities of the ellipses
/// containing its centre.
std::vector<ImageGrid> rasterize(const Phantom& p, const ImageShape& shape);

/// "thorax2" (water, bone) or "oral3" (water, bone, gold).
Phantom builtin_phantom(const std::string& name);

/**
 * Text phantom definition:
 *
 *     materials water bone
 *     # material cx cy a b angle density
 *     ellipse 0  0 0 150 100 0 1.0
 */
Phantom load_phantom(const std::filesystem::path& path);
void save_phantom(const Phantom& p, const std::filesystem::path& path);

} // namespace msct
