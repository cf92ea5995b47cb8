#include "msct/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "msct/error.hpp"

namespace msct {

namespace {

template <class Items>
double relative_distance(const Items& truth, const Items& estimate, const char* what) {
    if (truth.size() != estimate.size()) {
        throw DomainError(std::string(what) + ": got " + std::to_string(estimate.size()) + " estimates for " +
                          std::to_string(truth.size()) + " references");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto& a = truth[i];
        const auto& b = estimate[i];
        if (a.size() != b.size()) throw DomainError(std::string(what) + ": size mismatch in item " + std::to_string(i + 1));
        double num = 0.0;
        double den = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double d = a[j] - b[j];
            num += d * d;
            den += a[j] * a[j];
        }
        if (den == 0.0) throw DomainError(std::string(what) + ": reference item " + std::to_string(i + 1) + " has zero norm");
        total += num / den;
    }
    return total;
}

void check_same(const ImageGrid& ref, const ImageGrid& est, const char* what) {
    if (ref.nx() != est.nx() || ref.ny() != est.ny() || ref.values.size() != est.values.size()) {
        throw DomainError(std::string(what) + ": image dimensions differ");
    }
}

double mse(const ImageGrid& ref, const ImageGrid& est) {
    double s = 0.0;
    for (std::size_t j = 0; j < ref.values.size(); ++j) {
        const double d = ref.values[j] - est.values[j];
        s += d * d;
    }
    return s / static_cast<double>(ref.values.size());
}

double peak(const ImageGrid& ref, const char* what) {
    const double p = *std::max_element(ref.values.begin(), ref.values.end());
    if (!(p > 0.0)) throw DomainError(std::string(what) + ": reference maximum must be positive");
    return p;
}

} // namespace

double distance_data(const std::vector<Sinogram>& measured, const std::vector<Sinogram>& estimated) {
    std::vector<std::vector<double>> a;
    std::vector<std::vector<double>> b;
    for (const auto& s : measured) a.push_back(s.data);
    for (const auto& s : estimated) b.push_back(s.data);
    return relative_distance(a, b, "distance_data");
}

double distance_image(const std::vector<ImageGrid>& truth, const std::vector<ImageGrid>& estimate) {
    std::vector<std::vector<double>> a;
    std::vector<std::vector<double>> b;
    for (const auto& g : truth) a.push_back(g.values);
    for (const auto& g : estimate) b.push_back(g.values);
    return relative_distance(a, b, "distance_image");
}

double psnr(const ImageGrid& ref, const ImageGrid& est) {
    check_same(ref, est, "psnr");
    const double p = peak(ref, "psnr");
    const double e = mse(ref, est);
    if (e == 0.0) return kPsnrIdentical;
    return 10.0 * std::log10(p * p / e);
}

double rmse(const ImageGrid& ref, const ImageGrid& est) {
    check_same(ref, est, "rmse");
    return std::sqrt(mse(ref, est));
}

double ssim(const ImageGrid& ref, const ImageGrid& est) {
    check_same(ref, est, "ssim");
    const double l = peak(ref, "ssim");
    const double c1 = (0.01 * l) * (0.01 * l);
    const double c2 = (0.03 * l) * (0.03 * l);
    const int wx = std::min(8, ref.nx());
    const int wy = std::min(8, ref.ny());
    const double n = static_cast<double>(wx) * wy;
    const int ox = ref.nx() - wx + 1;
    const int oy = ref.ny() - wy + 1;

    std::vector<double> local(static_cast<std::size_t>(ox) * oy);
#pragma omp parallel for schedule(static)
    for (int y0 = 0; y0 < oy; ++y0) {
        for (int x0 = 0; x0 < ox; ++x0) {
            double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
            for (int y = y0; y < y0 + wy; ++y) {
                for (int x = x0; x < x0 + wx; ++x) {
                    const double a = ref.at(x, y);
                    const double b = est.at(x, y);
                    sa += a;
                    sb += b;
                    saa += a * a;
                    sbb += b * b;
                    sab += a * b;
                }
            }
            const double ma = sa / n;
            const double mb = sb / n;
            const double va = saa / n - ma * ma;
            const double vb = sbb / n - mb * mb;
            const double cov = sab / n - ma * mb;
            local[static_cast<std::size_t>(y0) * ox + x0] =
                ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    }
    double total = 0.0;
    for (double v : local) total += v;
    return total / static_cast<double>(local.size());
}

MetricReport compare(const std::vector<ImageGrid>& truth, const std::vector<ImageGrid>& estimate) {
    MetricReport r;
    r.d_image = distance_image(truth, estimate);
    for (std::size_t m = 0; m < truth.size(); ++m) {
        r.psnr.push_back(psnr(truth[m], estimate[m]));
        r.ssim.push_back(ssim(truth[m], estimate[m]));
        r.rmse.push_back(rmse(truth[m], estimate[m]));
    }
    return r;
}

} // namespace msct
