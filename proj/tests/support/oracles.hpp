#pragma once

// Reference computations the library is checked against. Each one is written
// the slow, obvious way and shares no code with the implementation under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "msct/geometry.hpp"

namespace oracle {

/// Toy dual-spectral system: energies 30/40 and 120/130 keV.
struct ToySystem {
    double w1[2] = {0.0002, 0.0009};
    double w2[2] = {0.0056, 0.0029};
    double bone[4] = {0.2812, 0.1342, 0.0328, 0.0314};
    double water[4] = {0.0395, 0.0281, 0.0159, 0.0154};

    /// -ln sum_w s_w exp(-(bone_w q1 + water_w q2)) evaluated term by term.
    double project(int spectrum, double q_bone, double q_water) const {
        const double* w = spectrum == 0 ? w1 : w2;
        const int base = spectrum == 0 ? 0 : 2;
        double sum = 0.0;
        for (int i = 0; i < 2; ++i) sum += w[i] * std::exp(-(bone[base + i] * q_bone + water[base + i] * q_water));
        return -std::log(sum);
    }
};

/// Classical Gram-Schmidt without normalization.
inline std::vector<Eigen::VectorXd> gram_schmidt(const std::vector<Eigen::VectorXd>& g) {
    std::vector<Eigen::VectorXd> d;
    for (const auto& v : g) {
        Eigen::VectorXd u = v;
        for (const auto& prev : d) u -= (prev.dot(v) / prev.squaredNorm()) * prev;
        d.push_back(u);
    }
    return d;
}

/// Length of the segment a->b inside the axis-aligned box [x0,x1] x [y0,y1].
inline double clipped_length(msct::Point2 a, msct::Point2 b, double x0, double x1, double y0, double y1) {
    double t0 = 0.0;
    double t1 = 1.0;
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x - x0, x1 - a.x, a.y - y0, y1 - a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return 0.0;
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0) t0 = std::max(t0, r);
        else t1 = std::min(t1, r);
    }
    return t1 > t0 ? (t1 - t0) * std::hypot(dx, dy) : 0.0;
}

/// Per-pixel brute-force intersection lengths: every pixel clipped on its own.
inline std::map<std::int32_t, double> brute_force_row(const msct::RayPath& ray, const msct::ImageShape& s) {
    std::map<std::int32_t, double> row;
    const double h = s.pixel_size;
    const double left = -0.5 * s.nx * h;
    const double bottom = -0.5 * s.ny * h;
    for (int iy = 0; iy < s.ny; ++iy) {
        for (int ix = 0; ix < s.nx; ++ix) {
            const double len = clipped_length(ray.source, ray.detector_point, left + ix * h, left + (ix + 1) * h,
                                              bottom + iy * h, bottom + (iy + 1) * h);
            if (len > 1e-12) row[iy * s.nx + ix] = len;
        }
    }
    return row;
}

/// Chord of the ray through the whole grid.
inline double grid_chord(const msct::RayPath& ray, const msct::ImageShape& s) {
    const double hx = 0.5 * s.nx * s.pixel_size;
    const double hy = 0.5 * s.ny * s.pixel_size;
    return clipped_length(ray.source, ray.detector_point, -hx, hx, -hy, hy);
}

/// Chord of the infinite line through a and b across a disk of radius r at the origin.
inline double disk_chord(msct::Point2 a, msct::Point2 b, double r) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double dist = std::abs(a.x * dy - a.y * dx) / std::hypot(dx, dy);
    return dist < r ? 2.0 * std::sqrt(r * r - dist * dist) : 0.0;
}

inline Eigen::VectorXd central_difference(const auto& f, Eigen::VectorXd x, double h) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Random matrix with singular values spread between 1 and `cond`.
inline Eigen::MatrixXd random_conditioned(int n, double cond, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    auto random_orthogonal = [&] {
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = z(rng);
        return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() * Eigen::MatrixXd::Identity(n, n);
    };
    Eigen::VectorXd sv(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < n; ++i) sv[i] = std::pow(cond, u(rng));
    sv[0] = 1.0;
    if (n > 1) sv[n - 1] = cond;
    return random_orthogonal() * sv.asDiagonal() * random_orthogonal();
}

/// Scratch directory removed when the object goes out of scope.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("msct_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace oracle
