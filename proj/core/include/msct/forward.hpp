#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msct/geometry.hpp"
#include "msct/spectra.hpp"
#include "msct/types.hpp"

namespace msct {

/**
 * One linearized measurement A x = b around a point x0.
 *
 * a_row is the gradient of the polychromatic projection at x0 (so the
 * hyperplane normal g is a_row itself) and b = p_meas + a_row . x0 - G(x0).
 */
struct LinearizedEq {
    Vec a_row;
    double b = 0.0;
    double p_meas = 0.0;

    const Vec& gradient() const noexcept { return a_row; }
    /// b - a_row . x, the linear residual at x.
    double residual(const Vec& x) const { return b - a_row.dot(x); }
};

/**
 * A spectrum bound to a material table: only energies with nonzero weight
 * are kept and their coefficients are gathered once, so the per-ray hot path
 * never touches the table.
 */
class PolyModel {
public:
    PolyModel(const Spectrum& s, const MaterialTable& t);

    std::size_t materials() const noexcept { return static_cast<std::size_t>(theta_.cols()); }
    std::size_t energies() const noexcept { return weights_.size(); }

    /// -ln sum_w s_w exp(-sum_m theta_{m,w} q_m), evaluated with the smallest
    /// exponent factored out.
    double project(std::span<const double> q) const;
    double project(const Vec& q) const;
    LinearizedEq linearize(const Vec& q0, double p_meas) const;

private:
    std::vector<double> weights_;
    Eigen::MatrixXd theta_; // energies x materials
};

double poly_project(std::span<const double> q, const Spectrum& s, const MaterialTable& t);
LinearizedEq linearize(const Vec& q0, const Spectrum& s, const MaterialTable& t, double p_meas);

/**
 * Polychromatic projections of the material images for every spectrum along
 * that spectrum's own geometry. Images are in g/cm^3 and geometry in mm, so
 * line integrals are scaled by `length_scale` (default mm -> cm).
 */
std::vector<Sinogram> simulate_acquisition(const std::vector<ImageGrid>& material_images,
                                           const std::vector<FanBeamGeometry>& geometries,
                                           const std::vector<Spectrum>& spectra,
                                           const MaterialTable& t,
                                           double length_scale = kMillimetresToCentimetres);

/**
 * Poisson counting noise on transmitted intensity: N ~ Poisson(i0 exp(-p)),
 * p_hat = -ln(max(N, 1) / i0). Each bin draws from its own counter-based
 * stream keyed by (seed, view, det).
 */
Sinogram add_poisson_noise(const Sinogram& s, double i0, std::uint64_t seed);

/// splitmix64-based engine; satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;
    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }
    result_type operator()() noexcept;

    static std::uint64_t mix(std::uint64_t z) noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace msct
