#include <algorithm>
#include <vector>

#include "msct/error.hpp"
#include "msct/geometry.hpp"

namespace msct {

namespace {
constexpr int kBackBlocks = 16;
}

SystemMatrix::SystemMatrix(const FanBeamGeometry& g, const ImageShape& shape, double length_scale)
    : geometry_(g), shape_(shape), length_scale_(length_scale) {
    g.validate();
    if (shape.nx < 1 || shape.ny < 1 || !(shape.pixel_size > 0.0)) {
        throw DomainError("system matrix: invalid image shape");
    }
    const int n_views = g.n_views;
    std::vector<std::vector<SparseRow>> per_view(static_cast<std::size_t>(n_views));
#pragma omp parallel for schedule(static)
    for (int v = 0; v < n_views; ++v) {
        auto& rows = per_view[static_cast<std::size_t>(v)];
        rows.reserve(static_cast<std::size_t>(g.n_det));
        for (int d = 0; d < g.n_det; ++d) {
            rows.push_back(trace(ray_path(g, v, d), shape));
        }
    }

    std::size_t nnz = 0;
    for (const auto& rows : per_view) {
        for (const auto& r : rows) nnz += r.size();
    }
    row_begin_.reserve(g.n_rays() + 1);
    pixels_.reserve(nnz);
    values_.reserve(nnz);
    row_norm2_.reserve(g.n_rays());
    row_begin_.push_back(0);
    for (auto& rows : per_view) {
        for (const auto& r : rows) {
            double norm2 = 0.0;
            for (const auto& e : r) {
                const double len = e.length * length_scale;
                pixels_.push_back(e.pixel);
                values_.push_back(len);
                norm2 += len * len;
            }
            row_norm2_.push_back(norm2);
            row_begin_.push_back(values_.size());
        }
        rows.clear();
        rows.shrink_to_fit();
    }
}

std::span<const std::int32_t> SystemMatrix::row_pixels(std::size_t ray) const noexcept {
    return {pixels_.data() + row_begin_[ray], row_begin_[ray + 1] - row_begin_[ray]};
}

std::span<const double> SystemMatrix::row_lengths(std::size_t ray) const noexcept {
    return {values_.data() + row_begin_[ray], row_begin_[ray + 1] - row_begin_[ray]};
}

void SystemMatrix::forward(std::span<const double> image, std::span<double> sinogram) const {
    if (image.size() != shape_.pixels() || sinogram.size() != rows()) {
        throw DomainError("system matrix forward: size mismatch");
    }
    const auto n = static_cast<std::ptrdiff_t>(rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
        double sum = 0.0;
        for (std::size_t i = row_begin_[r]; i < row_begin_[r + 1]; ++i) {
            sum += values_[i] * image[static_cast<std::size_t>(pixels_[i])];
        }
        sinogram[static_cast<std::size_t>(r)] = sum;
    }
}

void SystemMatrix::back(std::span<const double> sinogram, std::span<double> image) const {
    if (image.size() != shape_.pixels() || sinogram.size() != rows()) {
        throw DomainError("system matrix back: size mismatch");
    }
    const int blocks = std::min(kBackBlocks, geometry_.n_views);
    const std::size_t rays_per_view = static_cast<std::size_t>(geometry_.n_det);
    std::vector<std::vector<double>> partial(static_cast<std::size_t>(blocks),
                                             std::vector<double>(image.size(), 0.0));
#pragma omp parallel for schedule(static)
    for (int b = 0; b < blocks; ++b) {
        const auto v0 = static_cast<std::size_t>(b) * geometry_.n_views / blocks;
        const auto v1 = static_cast<std::size_t>(b + 1) * geometry_.n_views / blocks;
        auto& acc = partial[static_cast<std::size_t>(b)];
        for (std::size_t r = v0 * rays_per_view; r < v1 * rays_per_view; ++r) {
            const double w = sinogram[r];
            if (w == 0.0) continue;
            for (std::size_t i = row_begin_[r]; i < row_begin_[r + 1]; ++i) {
                acc[static_cast<std::size_t>(pixels_[i])] += values_[i] * w;
            }
        }
    }
    std::fill(image.begin(), image.end(), 0.0);
    for (const auto& acc : partial) {
        for (std::size_t j = 0; j < image.size(); ++j) {
            image[j] += acc[j];
        }
    }
}

void SystemMatrix::art(std::span<const double> sinogram, std::span<double> image, int sweeps,
                       double relax) const {
    if (image.size() != shape_.pixels() || sinogram.size() != rows()) {
        throw DomainError("system matrix art: size mismatch");
    }
    for (int s = 0; s < sweeps; ++s) {
        for (std::size_t r = 0; r < rows(); ++r) {
            const double norm2 = row_norm2_[r];
            if (norm2 == 0.0) continue;
            const std::size_t b = row_begin_[r];
            const std::size_t e = row_begin_[r + 1];
            double dot = 0.0;
            for (std::size_t i = b; i < e; ++i) {
                dot += values_[i] * image[static_cast<std::size_t>(pixels_[i])];
            }
            const double c = relax * (sinogram[r] - dot) / norm2;
            if (c == 0.0) continue;
            for (std::size_t i = b; i < e; ++i) {
                image[static_cast<std::size_t>(pixels_[i])] += c * values_[i];
            }
        }
    }
}

Sinogram SystemMatrix::forward(const ImageGrid& img) const {
    if (!(img.shape == shape_)) {
        throw DomainError("system matrix forward: image shape mismatch");
    }
    auto out = Sinogram::zeros(geometry_);
    forward(img.values, out.data);
    return out;
}

ImageGrid SystemMatrix::back(const Sinogram& s) const {
    if (!s.geometry.same_rays(geometry_)) {
        throw DomainError("system matrix back: sinogram geometry mismatch");
    }
    auto out = ImageGrid::zeros(shape_);
    back(s.data, out.values);
    return out;
}

ImageGrid SystemMatrix::art(const Sinogram& s, int sweeps, double relax) const {
    if (!s.geometry.same_rays(geometry_)) {
        throw DomainError("system matrix art: sinogram geometry mismatch");
    }
    auto out = ImageGrid::zeros(shape_);
    art(s.data, out.values, sweeps, relax);
    return out;
}

} // namespace msct
