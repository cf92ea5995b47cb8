#include "msct/phantom.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "msct/error.hpp"

namespace msct {

bool EllipseSpec::contains(double x, double y) const noexcept {
    const double t = angle * std::numbers::pi / 180.0;
    const double c = std::cos(t);
    const double s = std::sin(t);
    const double u = (x - cx) * c + (y - cy) * s;
    const double v = -(x - cx) * s + (y - cy) * c;
    return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
}

void Phantom::validate() const {
    if (materials == 0) {
        throw DomainError("phantom: needs at least one material");
    }
    if (!material_names.empty() && material_names.size() != materials) {
        throw DomainError("phantom: material_names must list every material");
    }
    for (const auto& e : ellipses) {
        if (!(e.a > 0.0) || !(e.b > 0.0)) {
            throw DomainError("phantom: ellipse semi-axes must be positive");
        }
        if (e.material >= materials) {
            throw DomainError("phantom: ellipse material index " + std::to_string(e.material) +
                              " >= " + std::to_string(materials));
        }
    }
}

std::vector<ImageGrid> rasterize(const Phantom& p, const ImageShape& shape) {
    p.validate();
    std::vector<ImageGrid> images(p.materials, ImageGrid::zeros(shape));
    const int ny = shape.ny;
#pragma omp parallel for schedule(static)
    for (int iy = 0; iy < ny; ++iy) {
        const double y = (iy - 0.5 * (shape.ny - 1)) * shape.pixel_size;
        for (int ix = 0; ix < shape.nx; ++ix) {
            const double x = (ix - 0.5 * (shape.nx - 1)) * shape.pixel_size;
            for (const auto& e : p.ellipses) {
                if (e.contains(x, y)) {
                    images[e.material].at(ix, iy) += e.density;
                }
            }
        }
    }
    return images;
}

namespace {

constexpr std::size_t kWater = 0;
constexpr std::size_t kBone = 1;
constexpr std::size_t kGold = 2;
constexpr double kWaterDensity = 1.00;
constexpr double kBoneDensity = 1.92;
constexpr double kGoldDensity = 19.32;

// Bone ellipse that displaces the water underneath it.
void add_bone(Phantom& p, double cx, double cy, double a, double b, double angle = 0.0) {
    p.ellipses.push_back({cx, cy, a, b, angle, kWater, -kWaterDensity});
    p.ellipses.push_back({cx, cy, a, b, angle, kBone, kBoneDensity});
}

Phantom thorax2() {
    Phantom p;
    p.materials = 2;
    p.material_names = {"water", "bone"};
    auto& e = p.ellipses;
    // body and lungs (lung tissue at 0.26 g/cm^3 of water)
    e.push_back({0, 0, 170, 115, 0, kWater, kWaterDensity});
    e.push_back({-75, 5, 55, 75, 0, kWater, -0.74});
    e.push_back({75, 5, 55, 75, 0, kWater, -0.74});
    // low-contrast inserts at +5% water density
    e.push_back({0, 40, 15, 12, 0, kWater, 0.05});
    e.push_back({-115, -75, 8, 8, 0, kWater, 0.05});
    e.push_back({115, -75, 8, 8, 0, kWater, 0.05});
    // spine, sternum and ribs
    add_bone(p, 0, -80, 16, 14);
    add_bone(p, 0, -104, 5, 8);
    add_bone(p, 0, 95, 10, 6);
    for (double side : {-1.0, 1.0}) {
        add_bone(p, side * 140, 40, 6, 9, side * 30);
        add_bone(p, side * 150, -10, 6, 9, 0);
        add_bone(p, side * 135, -60, 6, 9, -side * 30);
        add_bone(p, side * 80, -90, 6, 9, -side * 60);
    }
    return p;
}

Phantom oral3() {
    Phantom p;
    p.materials = 3;
    p.material_names = {"water", "bone", "gold"};
    auto& e = p.ellipses;
    e.push_back({0, 0, 95, 115, 0, kWater, kWaterDensity});
    // mandible: bone ring between two ellipses
    e.push_back({0, 10, 70, 80, 0, kWater, -kWaterDensity});
    e.push_back({0, 10, 70, 80, 0, kBone, kBoneDensity});
    e.push_back({0, 10, 58, 68, 0, kWater, kWaterDensity});
    e.push_back({0, 10, 58, 68, 0, kBone, -kBoneDensity});
    // teeth along the arch, three of them crowned with gold
    constexpr int kTeeth = 9;
    for (int i = 0; i < kTeeth; ++i) {
        const double t = std::numbers::pi * (0.15 + 0.7 * i / (kTeeth - 1));
        const double x = 48.0 * std::cos(t);
        const double y = 10.0 + 56.0 * std::sin(t);
        if (i == 1 || i == 4 || i == 7) {
            e.push_back({x, y, 5.5, 5.5, 0, kWater, -kWaterDensity});
            e.push_back({x, y, 5.5, 5.5, 0, kGold, kGoldDensity});
        } else {
            add_bone(p, x, y, 5.5, 5.5);
        }
    }
    // vertebra behind the airway
    add_bone(p, 0, -95, 14, 12);
    e.push_back({0, -40, 12, 9, 0, kWater, -kWaterDensity});
    return p;
}

} // namespace

Phantom builtin_phantom(const std::string& name) {
    if (name == "thorax2") return thorax2();
    if (name == "oral3") return oral3();
    throw DomainError("unknown builtin phantom '" + name + "' (expected thorax2 or oral3)");
}

Phantom load_phantom(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw LoadError("cannot open " + path.string());
    }
    Phantom p;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string keyword;
        if (!(fields >> keyword) || keyword[0] == '#') {
            continue;
        }
        const auto where = path.string() + ":" + std::to_string(line_no);
        if (keyword == "materials") {
            std::string name;
            while (fields >> name) p.material_names.push_back(name);
            p.materials = p.material_names.size();
        } else if (keyword == "ellipse") {
            EllipseSpec e;
            if (!(fields >> e.material >> e.cx >> e.cy >> e.a >> e.b >> e.angle >> e.density)) {
                throw LoadError(where + ": expected 'ellipse material cx cy a b angle density'");
            }
            p.ellipses.push_back(e);
        } else {
            throw LoadError(where + ": unknown keyword '" + keyword + "'");
        }
    }
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
    return p;
}

void save_phantom(const Phantom& p, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw LoadError("cannot write " + path.string());
    }
    out << "materials";
    for (std::size_t m = 0; m < p.materials; ++m) {
        out << ' ' << (m < p.material_names.size() ? p.material_names[m] : "m" + std::to_string(m));
    }
    out << "\n# material cx cy a b angle density\n" << std::setprecision(17);
    for (const auto& e : p.ellipses) {
        out << "ellipse " << e.material << ' ' << e.cx << ' ' << e.cy << ' ' << e.a << ' ' << e.b << ' '
            << e.angle << ' ' << e.density << '\n';
    }
}

} // namespace msct
