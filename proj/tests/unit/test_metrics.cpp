#include <doctest.h>

#include <cmath>
#include <random>

#include "msct/error.hpp"
#include "msct/metrics.hpp"

using namespace msct;

namespace {

ImageGrid image(int nx, int ny, std::vector<double> v) { return ImageGrid{ImageShape{nx, ny, 1.0}, std::move(v)}; }

Sinogram sinogram(std::vector<double> v) {
    FanBeamGeometry g;
    g.n_views = 1;
    g.n_det = static_cast<int>(v.size());
    return Sinogram{g, std::move(v), ""};
}

ImageGrid smooth(int n) {
    auto img = ImageGrid::zeros({n, n, 1.0});
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) img.at(x, y) = 1.0 + std::sin(0.2 * x) * std::cos(0.15 * y);
    return img;
}

} // namespace

TEST_CASE("distance_data examples") {
    CHECK(distance_data({sinogram({3, 4})}, {sinogram({3, 0})}) == doctest::Approx(0.64));
    CHECK(distance_data({sinogram({3, 4}), sinogram({1, 2})}, {sinogram({3, 4}), sinogram({1, 2})}) == 0.0);
    CHECK(distance_data({sinogram({3, 4}), sinogram({1, 2})}, {sinogram({0, 0}), sinogram({0, 0})}) == 2.0);
    CHECK_THROWS_AS(distance_data({sinogram({0, 0})}, {sinogram({0, 0})}), DomainError);
    CHECK_THROWS_AS(distance_data({sinogram({1, 0})}, {sinogram({0, 0, 0})}), DomainError);
}

TEST_CASE("distance_image examples") {
    CHECK(distance_image({image(2, 1, {1, 1})}, {image(2, 1, {1, 0})}) == doctest::Approx(0.5));
    const std::vector<ImageGrid> truth{image(2, 1, {1, 2}), image(2, 1, {0, 3}), image(2, 1, {5, 5})};
    CHECK(distance_image(truth, truth) == 0.0);
    std::vector<ImageGrid> zero(3, image(2, 1, {0, 0}));
    CHECK(distance_image(truth, zero) == 3.0);
    CHECK(distance_image(truth, {truth[0], truth[1], image(2, 1, {5, 5.000001})}) > 0.0);
}

TEST_CASE("psnr examples") {
    CHECK(psnr(image(1, 1, {1.0}), image(1, 1, {0.5})) == doctest::Approx(6.0206).epsilon(1e-4));
    const auto ref = smooth(16);
    CHECK(psnr(ref, ref) == kPsnrIdentical);
    auto est = ref;
    for (std::size_t j = 0; j < est.values.size(); j += 3) est.values[j] += 0.05;
    auto ref_scaled = ref;
    auto est_scaled = est;
    for (auto& v : ref_scaled.values) v *= 7.0;
    for (auto& v : est_scaled.values) v *= 7.0;
    CHECK(psnr(ref_scaled, est_scaled) == doctest::Approx(psnr(ref, est)).epsilon(1e-12));
    CHECK_THROWS_AS(psnr(ref, smooth(8)), DomainError);
    CHECK_THROWS_AS(psnr(image(1, 1, {0.0}), image(1, 1, {1.0})), DomainError);
}

TEST_CASE("rmse and ssim examples") {
    CHECK(rmse(image(2, 1, {0, 0}), image(2, 1, {3, 4})) == doctest::Approx(3.5355).epsilon(1e-4));
    const auto ref = smooth(24);
    CHECK(rmse(ref, ref) == 0.0);
    CHECK(ssim(ref, ref) == 1.0);
    auto shifted = ref;
    for (auto& v : shifted.values) v += 0.3;
    CHECK(rmse(ref, shifted) == doctest::Approx(0.3));
    const double s = ssim(ref, shifted);
    CHECK(s < 1.0);
    CHECK(s > -1.0);
    CHECK_THROWS_AS(ssim(ref, smooth(8)), DomainError);
    CHECK_THROWS_AS(rmse(ref, smooth(8)), DomainError);
}

TEST_CASE("rmse triangle inequality") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ImageGrid> img;
        for (int i = 0; i < 3; ++i) {
            auto g = ImageGrid::zeros({6, 5, 1.0});
            for (auto& v : g.values) v = z(rng);
            img.push_back(g);
        }
        CHECK(rmse(img[0], img[2]) <= rmse(img[0], img[1]) + rmse(img[1], img[2]) + 1e-12);
    }
}

TEST_CASE("psnr decreases as noise grows") {
    const auto ref = smooth(32);
    std::mt19937_64 rng(99);
    std::normal_distribution<double> z;
    double previous = kPsnrIdentical;
    for (double sigma : {0.01, 0.02, 0.05, 0.1, 0.2}) {
        double mean = 0.0;
        double sq = 0.0;
        const int trials = 100;
        for (int t = 0; t < trials; ++t) {
            auto est = ref;
            for (auto& v : est.values) v += sigma * z(rng);
            const double p = psnr(ref, est);
            mean += p;
            sq += p * p;
        }
        mean /= trials;
        const double sd = std::sqrt(std::max(0.0, sq / trials - mean * mean));
        CHECK(mean + 3.0 * sd / std::sqrt(static_cast<double>(trials)) < previous);
        previous = mean;
    }
}

TEST_CASE("compare reports every material") {
    const std::vector<ImageGrid> truth{smooth(16), smooth(16)};
    auto est = truth;
    est[1].values[5] += 0.1;
    const auto r = compare(truth, est);
    CHECK(r.psnr.size() == 2);
    CHECK(r.ssim.size() == 2);
    CHECK(r.rmse.size() == 2);
    CHECK(r.psnr[0] == kPsnrIdentical);
    CHECK(r.rmse[1] > 0.0);
    CHECK(r.d_image == doctest::Approx(distance_image(truth, est)));
}
