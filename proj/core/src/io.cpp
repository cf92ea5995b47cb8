#include "msct/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "msct/error.hpp"

namespace msct {

namespace fs = std::filesystem;

namespace {

struct Paths {
    fs::path raw;
    fs::path hdr;
};

Paths split(const fs::path& path) {
    fs::path stem = path;
    if (stem.extension() == ".raw" || stem.extension() == ".hdr") stem.replace_extension();
    return {fs::path(stem.string() + ".raw"), fs::path(stem.string() + ".hdr")};
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

const std::string& field(const Header& h, const std::string& key, const fs::path& where) {
    const auto it = h.find(key);
    if (it == h.end()) throw LoadError(where.string() + ": header is missing '" + key + "'");
    return it->second;
}

double number(const Header& h, const std::string& key, const fs::path& where) {
    const auto& s = field(h, key, where);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw LoadError(where.string() + ": header value '" + key + " = " + s + "' is not a number");
    }
    return v;
}

int integer(const Header& h, const std::string& key, const fs::path& where) {
    const auto& s = field(h, key, where);
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || v < 1) {
        throw LoadError(where.string() + ": header value '" + key + " = " + s + "' is not a positive integer");
    }
    return v;
}

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

const char* dtype_name(Dtype d) { return d == Dtype::float32 ? "float32" : "float64"; }

void write_raw(const std::vector<double>& values, Dtype dtype, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot open " + path.string() + " for writing");
    for (double v : values) {
        if (dtype == Dtype::float32) {
            const float f = to_little(static_cast<float>(v));
            out.write(reinterpret_cast<const char*>(&f), sizeof f);
        } else {
            const double d = to_little(v);
            out.write(reinterpret_cast<const char*>(&d), sizeof d);
        }
    }
    if (!out) throw LoadError("write failed: " + path.string());
}

std::vector<double> read_raw(const Header& h, std::size_t count, const fs::path& raw, const fs::path& hdr) {
    const auto& type = field(h, "dtype", hdr);
    std::size_t width = 0;
    if (type == "float32") width = 4;
    else if (type == "float64") width = 8;
    else throw LoadError(hdr.string() + ": unsupported dtype '" + type + "'");
    const auto order = h.find("byte_order");
    if (order != h.end() && order->second != "little") {
        throw LoadError(hdr.string() + ": only little-endian data is supported");
    }
    std::error_code ec;
    const auto size = fs::file_size(raw, ec);
    if (ec) throw LoadError("cannot read " + raw.string());
    if (size != count * width) {
        throw LoadError(raw.string() + ": expected " + std::to_string(count * width) + " bytes, found " +
                        std::to_string(size));
    }
    std::ifstream in(raw, std::ios::binary);
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (width == 4) {
            float f;
            in.read(reinterpret_cast<char*>(&f), sizeof f);
            values[i] = static_cast<double>(to_little(f));
        } else {
            double d;
            in.read(reinterpret_cast<char*>(&d), sizeof d);
            values[i] = to_little(d);
        }
    }
    if (!in) throw LoadError("read failed: " + raw.string());
    return values;
}

} // namespace

Header read_header(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open header " + path.string());
    Header h;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw LoadError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        h[trim(text.substr(0, eq))] = trim(text.substr(eq + 1));
    }
    return h;
}

void write_header(const Header& h, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot open " + path.string() + " for writing");
    for (const auto& [k, v] : h) out << k << " = " << v << '\n';
    if (!out) throw LoadError("write failed: " + path.string());
}

void write_image(const ImageGrid& img, const fs::path& path, Dtype dtype, const std::string& units,
                 const std::string& label) {
    const auto p = split(path);
    Header h{{"kind", "image"},
             {"nx", std::to_string(img.nx())},
             {"ny", std::to_string(img.ny())},
             {"pixel_size_mm", format_double(img.pixel_size())},
             {"dtype", dtype_name(dtype)},
             {"byte_order", "little"},
             {"layout", "row-major, x fastest, y upward"},
             {"units", units}};
    if (!label.empty()) h["label"] = label;
    write_raw(img.values, dtype, p.raw);
    write_header(h, p.hdr);
}

ImageGrid read_image(const fs::path& path) {
    const auto p = split(path);
    const auto h = read_header(p.hdr);
    if (field(h, "kind", p.hdr) != "image") throw LoadError(p.hdr.string() + ": not an image header");
    ImageGrid img;
    img.shape.nx = integer(h, "nx", p.hdr);
    img.shape.ny = integer(h, "ny", p.hdr);
    img.shape.pixel_size = number(h, "pixel_size_mm", p.hdr);
    if (!(img.shape.pixel_size > 0.0)) throw LoadError(p.hdr.string() + ": pixel_size_mm must be positive");
    img.values = read_raw(h, img.shape.pixels(), p.raw, p.hdr);
    return img;
}

void write_sinogram(const Sinogram& s, const fs::path& path, Dtype dtype, const std::string& units) {
    const auto p = split(path);
    const auto& g = s.geometry;
    Header h{{"kind", "sinogram"},
             {"n_views", std::to_string(g.n_views)},
             {"n_det", std::to_string(g.n_det)},
             {"sod_mm", format_double(g.sod)},
             {"sdd_mm", format_double(g.sdd)},
             {"det_cell_mm", format_double(g.det_cell)},
             {"start_angle_deg", format_double(g.start_angle)},
             {"angular_range_deg", format_double(g.angular_range)},
             {"dtype", dtype_name(dtype)},
             {"byte_order", "little"},
             {"layout", "view-major"},
             {"units", units}};
    if (!s.label.empty()) h["label"] = s.label;
    write_raw(s.data, dtype, p.raw);
    write_header(h, p.hdr);
}

Sinogram read_sinogram(const fs::path& path) {
    const auto p = split(path);
    const auto h = read_header(p.hdr);
    if (field(h, "kind", p.hdr) != "sinogram") throw LoadError(p.hdr.string() + ": not a sinogram header");
    Sinogram s;
    auto& g = s.geometry;
    g.n_views = integer(h, "n_views", p.hdr);
    g.n_det = integer(h, "n_det", p.hdr);
    g.sod = number(h, "sod_mm", p.hdr);
    g.sdd = number(h, "sdd_mm", p.hdr);
    g.det_cell = number(h, "det_cell_mm", p.hdr);
    g.start_angle = number(h, "start_angle_deg", p.hdr);
    g.angular_range = number(h, "angular_range_deg", p.hdr);
    try {
        g.validate();
    } catch (const DomainError& e) {
        throw LoadError(p.hdr.string() + ": " + e.what());
    }
    if (const auto it = h.find("label"); it != h.end()) s.label = it->second;
    s.data = read_raw(h, g.n_rays(), p.raw, p.hdr);
    return s;
}

void write_preview(const ImageGrid& img, double lo, double hi, const fs::path& path) {
    if (!(hi > lo)) throw DomainError("write_preview: window must satisfy lo < hi");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot open " + path.string() + " for writing");
    out << "P5\n" << img.nx() << ' ' << img.ny() << "\n65535\n";
    for (int y = img.ny() - 1; y >= 0; --y) {
        for (int x = 0; x < img.nx(); ++x) {
            const double u = (img.at(x, y) - lo) / (hi - lo);
            const double t = std::isfinite(u) ? std::clamp(u, 0.0, 1.0) : 0.0;
            const auto v = static_cast<std::uint16_t>(std::lround(t * 65535.0));
            const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
            out.write(bytes, 2);
        }
    }
    if (!out) throw LoadError("write failed: " + path.string());
}

} // namespace msct
