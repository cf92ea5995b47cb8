#pragma once

#include <limits>
#include <vector>

#include "msct/geometry.hpp"

namespace msct {

/// Returned by psnr() for identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

struct MetricReport {
    double d_data = 0.0;
    double d_image = 0.0;
    std::vector<double> psnr;
    std::vector<double> ssim;
    std::vector<double> rmse;
};

/// sum_k |p_k - p_est_k|^2 / |p_k|^2
double distance_data(const std::vector<Sinogram>& measured, const std::vector<Sinogram>& estimated);
/// sum_m |f_true_m - f_m|^2 / |f_true_m|^2
double distance_image(const std::vector<ImageGrid>& truth, const std::vector<ImageGrid>& estimate);

/// 10 log10(max(ref)^2 / MSE) in dB.
double psnr(const ImageGrid& ref, const ImageGrid& est);
/// Mean SSIM over all 8x8 windows (stride 1), C1 = (0.01 L)^2, C2 = (0.03 L)^2, L = max(ref).
double ssim(const ImageGrid& ref, const ImageGrid& est);
double rmse(const ImageGrid& ref, const ImageGrid& est);

MetricReport compare(const std::vector<ImageGrid>& truth, const std::vector<ImageGrid>& estimate);

} // namespace msct
