#include "msct/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "msct/error.hpp"

namespace msct {

void FanBeamGeometry::validate() const {
    if (!(sod > 0.0) || !(sdd > sod)) {
        throw DomainError("geometry: require 0 < sod < sdd");
    }
    if (n_det < 1 || n_views < 1) {
        throw DomainError("geometry: n_det and n_views must be >= 1");
    }
    if (!(det_cell > 0.0)) {
        throw DomainError("geometry: det_cell must be > 0");
    }
    if (!(angular_range > 0.0) || !std::isfinite(start_angle)) {
        throw DomainError("geometry: angular_range must be > 0 and start_angle finite");
    }
}

bool FanBeamGeometry::same_layout(const FanBeamGeometry& o) const noexcept {
    return sod == o.sod && sdd == o.sdd && n_det == o.n_det && det_cell == o.det_cell &&
           n_views == o.n_views && angular_range == o.angular_range;
}

bool FanBeamGeometry::same_rays(const FanBeamGeometry& o) const noexcept {
    return same_layout(o) && start_angle == o.start_angle;
}

ImageGrid ImageGrid::zeros(ImageShape shape) {
    if (shape.nx < 1 || shape.ny < 1 || !(shape.pixel_size > 0.0)) {
        throw DomainError("image: need nx, ny >= 1 and pixel_size > 0");
    }
    return ImageGrid{shape, std::vector<double>(shape.pixels(), 0.0)};
}

Sinogram Sinogram::zeros(const FanBeamGeometry& g, std::string label) {
    g.validate();
    return Sinogram{g, std::vector<double>(g.n_rays(), 0.0), std::move(label)};
}

RayPath ray_path(const FanBeamGeometry& g, int view, int det) {
    if (view < 0 || view >= g.n_views || det < 0 || det >= g.n_det) {
        throw DomainError("ray_path: (view " + std::to_string(view) + ", det " + std::to_string(det) +
                          ") outside " + std::to_string(g.n_views) + " x " + std::to_string(g.n_det));
    }
    const double phi = g.view_angle(view) * std::numbers::pi / 180.0;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const Point2 source{g.sod * c, g.sod * s};
    const Point2 centre{(g.sod - g.sdd) * c, (g.sod - g.sdd) * s};
    const double offset = (det - 0.5 * (g.n_det - 1)) * g.det_cell;
    return RayPath{source, Point2{centre.x - offset * s, centre.y + offset * c}, view, det};
}

namespace {

// Parametric position of the next grid plane the ray crosses after `alpha`.
struct PlaneWalker {
    double origin;   // ray start coordinate
    double delta;    // coordinate change over the whole segment
    double lo;       // first plane coordinate
    double spacing;
    int planes;      // number of pixels; planes are 0..planes
    int next = 0;
    int step = 0;

    double alpha_of(int i) const { return (lo + i * spacing - origin) / delta; }

    double start(double alpha) {
        if (delta == 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        const double pos = (origin + alpha * delta - lo) / spacing;
        if (delta > 0.0) {
            step = 1;
            next = std::clamp(static_cast<int>(std::floor(pos)) + 1, 0, planes + 1);
            while (next > 0 && alpha_of(next - 1) > alpha) --next;
            while (next <= planes && alpha_of(next) <= alpha) ++next;
        } else {
            step = -1;
            next = std::clamp(static_cast<int>(std::ceil(pos)) - 1, -1, planes);
            while (next < planes && alpha_of(next + 1) > alpha) ++next;
            while (next >= 0 && alpha_of(next) <= alpha) --next;
        }
        return current();
    }
    double current() const {
        return (next >= 0 && next <= planes) ? alpha_of(next) : std::numeric_limits<double>::infinity();
    }
    double advance() {
        next += step;
        return current();
    }
};

bool clip_slab(double origin, double delta, double lo, double hi, double& amin, double& amax) {
    if (delta == 0.0) {
        return origin > lo && origin < hi;
    }
    const double a0 = (lo - origin) / delta;
    const double a1 = (hi - origin) / delta;
    amin = std::max(amin, std::min(a0, a1));
    amax = std::min(amax, std::max(a0, a1));
    return true;
}

} // namespace

SparseRow trace(const RayPath& ray, const ImageShape& shape) {
    SparseRow row;
    if (shape.nx < 1 || shape.ny < 1 || !(shape.pixel_size > 0.0)) {
        return row;
    }
    const double ps = shape.pixel_size;
    const double xlo = -0.5 * shape.nx * ps;
    const double ylo = -0.5 * shape.ny * ps;
    const double dx = ray.detector_point.x - ray.source.x;
    const double dy = ray.detector_point.y - ray.source.y;
    const double length = std::hypot(dx, dy);
    if (length == 0.0) {
        return row;
    }

    double amin = 0.0;
    double amax = 1.0;
    if (!clip_slab(ray.source.x, dx, xlo, -xlo, amin, amax) ||
        !clip_slab(ray.source.y, dy, ylo, -ylo, amin, amax) || !(amin < amax)) {
        return row;
    }

    PlaneWalker wx{ray.source.x, dx, xlo, ps, shape.nx};
    PlaneWalker wy{ray.source.y, dy, ylo, ps, shape.ny};
    double ax = wx.start(amin);
    double ay = wy.start(amin);
    row.reserve(static_cast<std::size_t>(shape.nx + shape.ny));

    double a = amin;
    while (a < amax) {
        const double a_next = std::min({ax, ay, amax});
        if (a_next > a) {
            const double mid = 0.5 * (a + a_next);
            const int ix = std::clamp(static_cast<int>(std::floor((ray.source.x + mid * dx - xlo) / ps)), 0, shape.nx - 1);
            const int iy = std::clamp(static_cast<int>(std::floor((ray.source.y + mid * dy - ylo) / ps)), 0, shape.ny - 1);
            const auto pixel = static_cast<std::int32_t>(iy * shape.nx + ix);
            const double seg = (a_next - a) * length;
            if (!row.empty() && row.back().pixel == pixel) {
                row.back().length += seg;
            } else {
                row.push_back({pixel, seg});
            }
        }
        if (ax <= a_next) ax = wx.advance();
        if (ay <= a_next) ay = wy.advance();
        a = a_next;
    }
    return row;
}

Sinogram forward_project(const ImageGrid& img, const FanBeamGeometry& g, double length_scale) {
    auto out = Sinogram::zeros(g);
    const int n_views = g.n_views;
#pragma omp parallel for schedule(static)
    for (int v = 0; v < n_views; ++v) {
        for (int d = 0; d < g.n_det; ++d) {
            double sum = 0.0;
            for (const auto& e : trace(ray_path(g, v, d), img.shape)) {
                sum += e.length * img.values[static_cast<std::size_t>(e.pixel)];
            }
            out.at(v, d) = sum * length_scale;
        }
    }
    return out;
}

ImageGrid back_project(const Sinogram& s, const ImageShape& shape, double length_scale) {
    if (s.data.size() != s.geometry.n_rays()) {
        throw DomainError("back_project: sinogram size does not match its geometry");
    }
    return SystemMatrix(s.geometry, shape, length_scale).back(s);
}

ImageGrid art_reconstruct(const Sinogram& s, const ImageShape& shape, int sweeps, double relax,
                          double length_scale) {
    if (sweeps < 1 || !(relax > 0.0) || relax > 2.0) {
        throw DomainError("art_reconstruct: need sweeps >= 1 and 0 < relax <= 2");
    }
    return SystemMatrix(s.geometry, shape, length_scale).art(s, sweeps, relax);
}

} // namespace msct
