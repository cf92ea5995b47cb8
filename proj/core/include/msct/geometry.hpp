#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace msct {

/**
 * Fan-beam scan with a flat (equidistant) detector.
 *
 * The rotation centre is the origin. The source of view v sits on the circle
 * of radius `sod` at angle start_angle + v * angular_range / n_views; the
 * detector is perpendicular to the source-centre line at distance `sdd` from
 * the source. Lengths in mm, angles in degrees.
 */
struct FanBeamGeometry {
    double sod = 541.0;
    double sdd = 949.0;
    int n_det = 960;
    double det_cell = 1.25;
    int n_views = 720;
    double start_angle = 0.0;
    double angular_range = 360.0;

    void validate() const;
    std::size_t n_rays() const noexcept {
        return static_cast<std::size_t>(n_views) * static_cast<std::size_t>(n_det);
    }
    double view_spacing() const noexcept { return angular_range / n_views; }
    double view_angle(int view) const noexcept { return start_angle + view * view_spacing(); }
    /// Same layout and angles, i.e. identical ray sets.
    bool same_rays(const FanBeamGeometry& other) const noexcept;
    /// Same layout; start angles may differ.
    bool same_layout(const FanBeamGeometry& other) const noexcept;
};

/// Pixel layout of a square-pixel image centred on the rotation centre.
struct ImageShape {
    int nx = 0;
    int ny = 0;
    double pixel_size = 1.0;

    std::size_t pixels() const noexcept {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    }
    friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// Row-major image; pixel (ix, iy) has centre ((ix - (nx-1)/2) * s, (iy - (ny-1)/2) * s).
struct ImageGrid {
    ImageShape shape;
    std::vector<double> values;

    static ImageGrid zeros(ImageShape shape);
    int nx() const noexcept { return shape.nx; }
    int ny() const noexcept { return shape.ny; }
    double pixel_size() const noexcept { return shape.pixel_size; }
    double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * shape.nx + ix]; }
    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * shape.nx + ix]; }
};

/// Projection data indexed by (view, det), view-major. Also used for per-material
/// basis projections.
struct Sinogram {
    FanBeamGeometry geometry;
    std::vector<double> data;
    std::string label;

    static Sinogram zeros(const FanBeamGeometry& g, std::string label = {});
    int n_views() const noexcept { return geometry.n_views; }
    int n_det() const noexcept { return geometry.n_det; }
    double& at(int view, int det) { return data[static_cast<std::size_t>(view) * geometry.n_det + det]; }
    double at(int view, int det) const { return data[static_cast<std::size_t>(view) * geometry.n_det + det]; }
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct RayPath {
    Point2 source;
    Point2 detector_point;
    int view = 0;
    int det = 0;
};

struct SparseEntry {
    std::int32_t pixel;
    double length;
};
using SparseRow = std::vector<SparseEntry>;

/// DomainError on out-of-range indices.
RayPath ray_path(const FanBeamGeometry& g, int view, int det);

/// Exact intersection lengths of the source-detector segment with each pixel (Siddon walk).
/// Rays that miss the grid give an empty row.
SparseRow trace(const RayPath& ray, const ImageShape& shape);

/// Line integrals of `img` along every ray; `length_scale` converts mm to the
/// unit the image values are expressed per (0.1 for g/cm^3 images -> g/cm^2).
Sinogram forward_project(const ImageGrid& img, const FanBeamGeometry& g, double length_scale = 1.0);

/// Transpose of forward_project.
ImageGrid back_project(const Sinogram& s, const ImageShape& shape, double length_scale = 1.0);

/// Kaczmarz/ART from a zero image, view-major ray order.
ImageGrid art_reconstruct(const Sinogram& s, const ImageShape& shape, int sweeps = 1,
                          double relax = 1.0, double length_scale = 1.0);

/**
 * Cached projection operator R for one geometry and image layout, stored as
 * CSR rows in ray order (view-major). Forward projection is parallel over
 * rays; the transpose accumulates fixed view blocks and merges them in block
 * order so results do not depend on the thread count.
 */
class SystemMatrix {
public:
    SystemMatrix(const FanBeamGeometry& g, const ImageShape& shape, double length_scale = 1.0);

    const FanBeamGeometry& geometry() const noexcept { return geometry_; }
    const ImageShape& shape() const noexcept { return shape_; }
    double length_scale() const noexcept { return length_scale_; }
    std::size_t rows() const noexcept { return row_norm2_.size(); }
    std::size_t nonzeros() const noexcept { return values_.size(); }

    std::span<const std::int32_t> row_pixels(std::size_t ray) const noexcept;
    std::span<const double> row_lengths(std::size_t ray) const noexcept;
    double row_norm2(std::size_t ray) const noexcept { return row_norm2_[ray]; }

    void forward(std::span<const double> image, std::span<double> sinogram) const;
    void back(std::span<const double> sinogram, std::span<double> image) const;
    /// In-place Kaczmarz sweeps starting from the contents of `image`.
    void art(std::span<const double> sinogram, std::span<double> image, int sweeps, double relax) const;

    Sinogram forward(const ImageGrid& img) const;
    ImageGrid back(const Sinogram& s) const;
    ImageGrid art(const Sinogram& s, int sweeps, double relax) const;

private:
    FanBeamGeometry geometry_;
    ImageShape shape_;
    double length_scale_;
    std::vector<std::size_t> row_begin_;
    std::vector<std::int32_t> pixels_;
    std::vector<double> values_;
    std::vector<double> row_norm2_;
};

} // namespace msct
