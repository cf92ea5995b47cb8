#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace msct {

/**
 * Sampled X-ray spectrum s_{k,w} on a uniform integer-keV grid.
 *
 * Weights are the normalized effective spectrum with the sampling interval
 * folded in. `allow_unnormalized` marks hand-built spectra (e.g. the toy
 * system) whose weights intentionally do not sum to one.
 */
struct Spectrum {
    std::vector<int> energies;
    std::vector<double> weights;
    std::string label;
    int step_kev = 1;
    bool allow_unnormalized = false;

    std::size_t size() const noexcept { return energies.size(); }
    double total() const;
};

/// Throws DomainError when the invariants (sizes, uniform ascending grid,
/// nonnegative weights, unit sum unless allow_unnormalized) are violated.
void validate(const Spectrum& s);

/// Reads a two-column (keV, weight) text file. The result is not normalized.
Spectrum load_spectrum(const std::filesystem::path& path);
void save_spectrum(const Spectrum& s, const std::filesystem::path& path);

/// Scales weights to unit sum; energies are untouched.
Spectrum normalize(const Spectrum& s);

/**
 * Mass attenuation coefficients theta_{m,w} (cm^2/g) of M basis materials on
 * an integer-keV grid. Lookups are exact: there is no interpolation, so the
 * grid must contain every energy of every spectrum it is used with.
 */
class MaterialTable {
public:
    MaterialTable() = default;
    /// `mac` is materials x energies.
    MaterialTable(std::vector<int> energies, std::vector<std::string> names,
                  std::vector<double> densities, Eigen::MatrixXd mac);

    std::size_t materials() const noexcept { return names_.size(); }
    const std::vector<int>& energies() const noexcept { return energies_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<double>& densities() const noexcept { return densities_; }
    const Eigen::MatrixXd& coefficients() const noexcept { return mac_; }

    /// Index of `energy_kev` on the grid, or -1 when it is off-grid.
    std::ptrdiff_t energy_index(int energy_kev) const noexcept;
    std::ptrdiff_t material_index(const std::string& name) const noexcept;
    bool covers(const Spectrum& s) const noexcept;

    /// Sub-table with the named materials in the given order.
    MaterialTable select(const std::vector<std::string>& names) const;

private:
    std::vector<int> energies_;
    std::vector<std::string> names_;
    std::vector<double> densities_;
    Eigen::MatrixXd mac_;
};

/// Exact stored coefficient; DomainError for off-grid energies or a bad material index.
double mac_lookup(const MaterialTable& t, std::size_t material, int energy_kev);

struct MaterialFile {
    std::filesystem::path path;
    std::string name;
    double density = 1.0;
};

/// Builds a table from per-material two-column (keV, cm^2/g) files sharing one grid.
MaterialTable load_material_table(const std::vector<MaterialFile>& files);
void save_mac(const MaterialTable& t, std::size_t material, const std::filesystem::path& path);

namespace builtin {

/// Two-energy spectra of the toy dual-spectral system (index 0 or 1), unnormalized.
Spectrum toy_spectrum(int index);
/// Bone / water coefficients of the toy system at 30, 40, 120 and 130 keV.
MaterialTable toy_table();

/// Approximate photon-interaction coefficients for water, bone, gold, aluminium
/// and copper on a 1 keV grid from 20 to 150 keV, log-log interpolated from
/// tabulated anchor energies.
MaterialTable reference_table();
/// reference_table() restricted to `names`.
MaterialTable reference_table(const std::vector<std::string>& names);

/// Synthetic tungsten-anode spectrum: Kramers continuum, K lines above 70 kVp,
/// aluminium and copper filtration. Normalized.
Spectrum tube_spectrum(int kvp, double aluminium_mm, double copper_mm, std::string label);
/// "40kvp", "80kvp" or "140kvp" (the last with 1 mm Cu).
Spectrum named_spectrum(const std::string& name);

} // namespace builtin

} // namespace msct
