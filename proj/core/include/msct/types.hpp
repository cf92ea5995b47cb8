#pragma once

#include <Eigen/Dense>

namespace msct {

/// Upper bound on basis materials / equations per ray. Per-ray systems stay on the stack.
inline constexpr int kMaxMaterials = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxMaterials, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxMaterials, kMaxMaterials>;

/// Geometry works in millimetres while attenuation tables are in cm^2/g.
inline constexpr double kMillimetresToCentimetres = 0.1;

} // namespace msct
