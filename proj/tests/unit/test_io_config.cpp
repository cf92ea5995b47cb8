#include <doctest.h>

#include <fstream>
#include <iterator>

#include "msct/config.hpp"
#include "msct/error.hpp"
#include "msct/io.hpp"
#include "oracles.hpp"

using namespace msct;

namespace {

ImageGrid sample_image() {
    auto img = ImageGrid::zeros({5, 3, 0.75});
    for (std::size_t j = 0; j < img.values.size(); ++j) img.values[j] = 0.1 * static_cast<double>(j) - 0.3;
    return img;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_CASE("images round-trip in both precisions") {
    oracle::TempDir dir("io");
    const auto img = sample_image();
    write_image(img, dir / "water", Dtype::float64, "g/cm^3", "water");
    const auto back = read_image(dir / "water.hdr");
    CHECK(back.shape == img.shape);
    CHECK(back.values == img.values);
    CHECK(read_image(dir / "water.raw").values == img.values);
    CHECK(std::filesystem::file_size(dir / "water.raw") == img.values.size() * 8);
    const auto h = read_header(dir / "water.hdr");
    CHECK(h.at("kind") == "image");
    CHECK(h.at("label") == "water");
    CHECK(h.at("byte_order") == "little");

    write_image(img, dir / "f32", Dtype::float32);
    const auto single = read_image(dir / "f32");
    for (std::size_t j = 0; j < img.values.size(); ++j)
        CHECK(single.values[j] == static_cast<double>(static_cast<float>(img.values[j])));
}

TEST_CASE("sinograms round-trip with their geometry") {
    oracle::TempDir dir("io");
    FanBeamGeometry g;
    g.n_views = 4;
    g.n_det = 6;
    g.start_angle = 0.25;
    g.det_cell = 1.1;
    auto s = Sinogram::zeros(g, "80kvp");
    for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] = 1.0 / (1.0 + static_cast<double>(i));
    write_sinogram(s, dir / "p1", Dtype::float64);
    const auto back = read_sinogram(dir / "p1");
    CHECK(back.geometry.same_rays(g));
    CHECK(back.geometry.start_angle == 0.25);
    CHECK(back.data == s.data);
    CHECK(back.label == "80kvp");
    CHECK_THROWS_AS(read_image(dir / "p1"), LoadError);
}

TEST_CASE("corrupt headers and data are rejected") {
    oracle::TempDir dir("io");
    write_image(sample_image(), dir / "img", Dtype::float32);
    CHECK_THROWS_AS(read_image(dir / "absent"), LoadError);

    auto h = read_header(dir / "img.hdr");
    h["nx"] = "6";
    write_header(h, dir / "img.hdr");
    CHECK_THROWS_AS(read_image(dir / "img"), LoadError); // size mismatch
    h["nx"] = "five";
    write_header(h, dir / "img.hdr");
    CHECK_THROWS_AS(read_image(dir / "img"), LoadError);
    h["nx"] = "5";
    h["dtype"] = "int16";
    write_header(h, dir / "img.hdr");
    CHECK_THROWS_AS(read_image(dir / "img"), LoadError);
    h["dtype"] = "float32";
    h["byte_order"] = "big";
    write_header(h, dir / "img.hdr");
    CHECK_THROWS_AS(read_image(dir / "img"), LoadError);
    h.erase("byte_order");
    h.erase("pixel_size_mm");
    write_header(h, dir / "img.hdr");
    CHECK_THROWS_AS(read_image(dir / "img"), LoadError);

    std::ofstream(dir / "junk.hdr") << "this line has no separator\n";
    CHECK_THROWS_AS(read_header(dir / "junk.hdr"), LoadError);
}

TEST_CASE("preview is a 16-bit PGM with the top row first") {
    oracle::TempDir dir("io");
    auto img = ImageGrid::zeros({2, 2, 1.0});
    img.at(0, 1) = 1.0; // top-left on screen
    img.at(1, 0) = 0.5;
    write_preview(img, 0.0, 1.0, dir / "p.pgm");
    const auto bytes = slurp(dir / "p.pgm");
    const std::string header = "P5\n2 2\n65535\n";
    REQUIRE(bytes.size() == header.size() + 8);
    CHECK(bytes.substr(0, header.size()) == header);
    auto px = [&](int i) {
        return (static_cast<unsigned char>(bytes[header.size() + 2 * i]) << 8) |
               static_cast<unsigned char>(bytes[header.size() + 2 * i + 1]);
    };
    CHECK(px(0) == 65535);
    CHECK(px(1) == 0);
    CHECK(px(2) == 0);
    CHECK(px(3) == 32768);
    CHECK_THROWS_AS(write_preview(img, 1.0, 1.0, dir / "q.pgm"), DomainError);
}

TEST_CASE("config parsing and typed getters") {
    const auto c = Config::parse(
        "# comment\n"
        "; another\n"
        "seed = 7\n"
        "[scan]\n"
        "views = 360\n"
        "offsets = 0, 0.25\n"
        "spectra = 80kvp 140kvp\n"
        "noise = yes\n"
        "[solver]\n"
        "beta = 0.9\n");
    CHECK(c.has("scan.views"));
    CHECK_FALSE(c.has("views"));
    CHECK(c.get_int("seed") == 7);
    CHECK(c.get_int("scan.views") == 360);
    CHECK(c.get_double("solver.beta") == 0.9);
    CHECK(c.get_doubles("scan.offsets") == std::vector<double>{0.0, 0.25});
    CHECK(c.get_list("scan.spectra") == std::vector<std::string>{"80kvp", "140kvp"});
    CHECK(c.get_bool("scan.noise", false));
    CHECK(c.get_double("solver.kappa", 1.0) == 1.0);
    CHECK(c.get_string("output.dir", "out") == "out");
    CHECK(c.get_int("solver.iters", 30) == 30);
    CHECK_FALSE(c.get_bool("solver.adaptive", false));
    CHECK(c.resolved().at("solver.kappa") == "1");
}

TEST_CASE("config errors name the key") {
    const auto c = Config::parse("[scan]\nviews = many\nflag = maybe\n");
    CHECK_THROWS_WITH_AS(c.get_int("scan.views"), doctest::Contains("scan.views"), ConfigError);
    CHECK_THROWS_WITH_AS(c.get_string("scan.missing"), doctest::Contains("scan.missing"), ConfigError);
    CHECK_THROWS_AS(c.get_bool("scan.flag", true), ConfigError);
    CHECK_THROWS_AS(c.get_double("scan.views"), ConfigError);
    CHECK_THROWS_AS(Config::parse("[broken\nkey = 1\n"), ConfigError);
    CHECK_THROWS_AS(Config::load("/nonexistent/run.ini"), ConfigError);
}

TEST_CASE("config dump reproduces the resolved values") {
    auto c = Config::parse("top = 1\n[b]\ny = 2\n[a]\nx = 3\nunused = 4\n");
    c.get_int("top");
    c.get_int("b.y");
    c.get_int("a.x");
    c.set("run.seed", "11");
    const auto text = c.dump();
    CHECK(text == "top = 1\n\n[a]\nx = 3\n\n[b]\ny = 2\n\n[run]\nseed = 11\n");
    const auto again = Config::parse(text);
    CHECK(again.get_int("a.x") == 3);
    CHECK(again.get_int("run.seed") == 11);
    CHECK_FALSE(again.has("a.unused"));

    oracle::TempDir dir("cfg");
    std::ofstream(dir / "run.ini") << text;
    CHECK(Config::load(dir / "run.ini").get_int("b.y") == 2);
}
