#include "msct/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "msct/error.hpp"

namespace msct {

PolyModel::PolyModel(const Spectrum& s, const MaterialTable& t) {
    validate(s);
    if (!t.covers(s)) {
        throw DomainError("spectrum '" + s.label + "' has energies outside the material table grid");
    }
    if (t.materials() > static_cast<std::size_t>(kMaxMaterials)) {
        throw DomainError("material table has more than " + std::to_string(kMaxMaterials) + " materials");
    }
    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.weights[i] > 0.0) used.push_back(i);
    }
    if (used.empty()) {
        throw DomainError("spectrum '" + s.label + "' has no positive weight");
    }
    const auto m_count = static_cast<Eigen::Index>(t.materials());
    theta_.resize(static_cast<Eigen::Index>(used.size()), m_count);
    for (std::size_t r = 0; r < used.size(); ++r) {
        const auto e = t.energy_index(s.energies[used[r]]);
        weights_.push_back(s.weights[used[r]]);
        theta_.row(static_cast<Eigen::Index>(r)) = t.coefficients().col(e).transpose();
    }
}

namespace {

// Exponents sum_m theta_{m,w} q_m for every energy and their minimum.
template <class Q>
double exponents(const Eigen::MatrixXd& theta, const Q& q, double* out) {
    double lowest = std::numeric_limits<double>::infinity();
    const auto n_e = theta.rows();
    const auto n_m = theta.cols();
    for (Eigen::Index w = 0; w < n_e; ++w) {
        double e = 0.0;
        for (Eigen::Index m = 0; m < n_m; ++m) {
            e += theta(w, m) * q[static_cast<std::size_t>(m)];
        }
        out[w] = e;
        lowest = std::min(lowest, e);
    }
    return lowest;
}

[[noreturn]] void infinite_projection() {
    throw DomainError("poly_project: transmitted intensity underflows (projection is infinite)");
}

} // namespace

double PolyModel::project(std::span<const double> q) const {
    if (q.size() != materials()) {
        throw DomainError("poly_project: q has " + std::to_string(q.size()) + " entries, table has " +
                          std::to_string(materials()) + " materials");
    }
    double e[512];
    std::vector<double> heap;
    double* buf = e;
    if (weights_.size() > std::size(e)) {
        heap.resize(weights_.size());
        buf = heap.data();
    }
    const double lowest = exponents(theta_, q, buf);
    double sum = 0.0;
    for (std::size_t w = 0; w < weights_.size(); ++w) {
        sum += weights_[w] * std::exp(lowest - buf[w]);
    }
    if (!(sum > 0.0) || !std::isfinite(sum) || !std::isfinite(lowest)) {
        infinite_projection();
    }
    return lowest - std::log(sum);
}

double PolyModel::project(const Vec& q) const {
    return project(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

LinearizedEq PolyModel::linearize(const Vec& q0, double p_meas) const {
    if (static_cast<std::size_t>(q0.size()) != materials()) {
        throw DomainError("linearize: q0 size does not match the material count");
    }
    const auto n_m = theta_.cols();
    double lowest = std::numeric_limits<double>::infinity();
    std::vector<double> expo(weights_.size());
    for (std::size_t w = 0; w < weights_.size(); ++w) {
        expo[w] = theta_.row(static_cast<Eigen::Index>(w)).dot(q0);
        lowest = std::min(lowest, expo[w]);
    }
    // Theta_m and Phi share the factor exp(-lowest), which cancels in the ratio.
    Vec theta_sum = Vec::Zero(n_m);
    double phi = 0.0;
    for (std::size_t w = 0; w < weights_.size(); ++w) {
        const double term = weights_[w] * std::exp(lowest - expo[w]);
        phi += term;
        theta_sum += term * theta_.row(static_cast<Eigen::Index>(w)).transpose();
    }
    if (!(phi > 0.0) || !std::isfinite(phi) || !std::isfinite(lowest)) {
        infinite_projection();
    }
    LinearizedEq eq;
    eq.a_row = theta_sum / phi;
    eq.p_meas = p_meas;
    const double g0 = lowest - std::log(phi);
    eq.b = p_meas + eq.a_row.dot(q0) - g0;
    return eq;
}

double poly_project(std::span<const double> q, const Spectrum& s, const MaterialTable& t) {
    return PolyModel(s, t).project(q);
}

LinearizedEq linearize(const Vec& q0, const Spectrum& s, const MaterialTable& t, double p_meas) {
    return PolyModel(s, t).linearize(q0, p_meas);
}

std::vector<Sinogram> simulate_acquisition(const std::vector<ImageGrid>& material_images,
                                           const std::vector<FanBeamGeometry>& geometries,
                                           const std::vector<Spectrum>& spectra, const MaterialTable& t,
                                           double length_scale) {
    if (geometries.size() != spectra.size() || spectra.empty()) {
        throw DomainError("simulate_acquisition: need one geometry per spectrum");
    }
    if (material_images.size() != t.materials()) {
        throw DomainError("simulate_acquisition: need one image per table material");
    }
    const auto shape = material_images.front().shape;
    for (const auto& img : material_images) {
        if (!(img.shape == shape)) {
            throw DomainError("simulate_acquisition: material images differ in shape");
        }
    }
    const std::size_t n_mat = material_images.size();

    std::vector<Sinogram> out;
    // q for the most recent distinct geometry, [ray * n_mat + m]
    std::vector<double> q;
    const FanBeamGeometry* q_geometry = nullptr;
    for (std::size_t k = 0; k < spectra.size(); ++k) {
        const auto& g = geometries[k];
        g.validate();
        const PolyModel model(spectra[k], t);
        if (q_geometry == nullptr || !q_geometry->same_rays(g)) {
            q.assign(g.n_rays() * n_mat, 0.0);
            const int n_views = g.n_views;
#pragma omp parallel for schedule(static)
            for (int v = 0; v < n_views; ++v) {
                for (int d = 0; d < g.n_det; ++d) {
                    const std::size_t ray = static_cast<std::size_t>(v) * g.n_det + d;
                    for (const auto& e : trace(ray_path(g, v, d), shape)) {
                        for (std::size_t m = 0; m < n_mat; ++m) {
                            q[ray * n_mat + m] += e.length * material_images[m].values[static_cast<std::size_t>(e.pixel)];
                        }
                    }
                    for (std::size_t m = 0; m < n_mat; ++m) {
                        q[ray * n_mat + m] *= length_scale;
                    }
                }
            }
            q_geometry = &g;
        }
        auto sino = Sinogram::zeros(g, spectra[k].label);
        const auto n_rays = static_cast<std::ptrdiff_t>(g.n_rays());
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t r = 0; r < n_rays; ++r) {
            sino.data[static_cast<std::size_t>(r)] =
                model.project(std::span<const double>(q.data() + static_cast<std::size_t>(r) * n_mat, n_mat));
        }
        out.push_back(std::move(sino));
    }
    return out;
}

std::uint64_t CounterRng::mix(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

CounterRng::result_type CounterRng::operator()() noexcept {
    return mix(key_ + 0x9E3779B97F4A7C15ull * ++counter_);
}

Sinogram add_poisson_noise(const Sinogram& s, double i0, std::uint64_t seed) {
    if (!(i0 >= 1.0)) {
        throw DomainError("add_poisson_noise: i0 must be >= 1");
    }
    Sinogram out = s;
    const auto n = static_cast<std::ptrdiff_t>(s.data.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bin = 0; bin < n; ++bin) {
        CounterRng rng(CounterRng::mix(seed ^ CounterRng::mix(static_cast<std::uint64_t>(bin))));
        std::poisson_distribution<long long> counts(i0 * std::exp(-s.data[static_cast<std::size_t>(bin)]));
        const auto hits = std::max<long long>(counts(rng), 1);
        out.data[static_cast<std::size_t>(bin)] = -std::log(static_cast<double>(hits) / i0);
    }
    return out;
}

} // namespace msct
