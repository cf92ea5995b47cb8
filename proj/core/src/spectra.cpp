#include "msct/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "msct/error.hpp"
#include "text_table.hpp"

namespace msct {

namespace detail {

std::vector<std::pair<double, double>> read_two_columns(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw LoadError("cannot open " + path.string());
    }
    std::vector<std::pair<double, double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double a = 0.0;
        double b = 0.0;
        std::string rest;
        if (!(fields >> a >> b) || (fields >> rest)) {
            throw LoadError(path.string() + ":" + std::to_string(line_no) +
                            ": expected two numeric columns");
        }
        if (!std::isfinite(a) || !std::isfinite(b)) {
            throw LoadError(path.string() + ":" + std::to_string(line_no) + ": non-finite value");
        }
        rows.emplace_back(a, b);
    }
    if (rows.empty()) {
        throw LoadError(path.string() + ": no data rows");
    }
    return rows;
}

int integral_kev(double value, const std::filesystem::path& path, std::size_t line) {
    const double rounded = std::round(value);
    if (std::abs(value - rounded) > 1e-9) {
        throw LoadError(path.string() + ": row " + std::to_string(line) + ": energy " +
                        std::to_string(value) + " keV is not on an integer grid");
    }
    return static_cast<int>(rounded);
}

} // namespace detail

double Spectrum::total() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void validate(const Spectrum& s) {
    if (s.energies.empty() || s.energies.size() != s.weights.size()) {
        throw DomainError("spectrum '" + s.label + "': energies and weights must be non-empty and equal length");
    }
    if (s.step_kev < 1) {
        throw DomainError("spectrum '" + s.label + "': step must be >= 1 keV");
    }
    for (std::size_t i = 1; i < s.energies.size(); ++i) {
        if (s.energies[i] - s.energies[i - 1] != s.step_kev) {
            throw DomainError("spectrum '" + s.label + "': energy grid is not uniform with step " +
                              std::to_string(s.step_kev) + " keV");
        }
    }
    for (double w : s.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw DomainError("spectrum '" + s.label + "': negative or non-finite weight");
        }
    }
    if (!s.allow_unnormalized && std::abs(s.total() - 1.0) > 1e-12) {
        throw DomainError("spectrum '" + s.label + "': weights do not sum to 1");
    }
}

Spectrum load_spectrum(const std::filesystem::path& path) {
    const auto rows = detail::read_two_columns(path);
    Spectrum s;
    s.label = path.stem().string();
    s.allow_unnormalized = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int e = detail::integral_kev(rows[i].first, path, i + 1);
        if (rows[i].second < 0.0) {
            throw LoadError(path.string() + ": negative weight at " + std::to_string(e) + " keV");
        }
        s.energies.push_back(e);
        s.weights.push_back(rows[i].second);
    }
    if (s.energies.size() > 1) {
        s.step_kev = s.energies[1] - s.energies[0];
        if (s.step_kev <= 0) {
            throw LoadError(path.string() + ": energies must be strictly ascending");
        }
    }
    for (std::size_t i = 1; i < s.energies.size(); ++i) {
        if (s.energies[i] - s.energies[i - 1] != s.step_kev) {
            throw LoadError(path.string() + ": non-uniform energy grid at " +
                            std::to_string(s.energies[i]) + " keV");
        }
    }
    return s;
}

void save_spectrum(const Spectrum& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw LoadError("cannot write " + path.string());
    }
    out << "# spectrum " << s.label << "\n# keV weight\n" << std::setprecision(17);
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << s.energies[i] << ' ' << s.weights[i] << '\n';
    }
}

Spectrum normalize(const Spectrum& s) {
    const double sum = s.total();
    if (!(sum > 0.0)) {
        throw DomainError("spectrum '" + s.label + "': cannot normalize all-zero weights");
    }
    Spectrum out = s;
    for (double& w : out.weights) {
        w /= sum;
    }
    out.allow_unnormalized = false;
    return out;
}

MaterialTable::MaterialTable(std::vector<int> energies, std::vector<std::string> names,
                             std::vector<double> densities, Eigen::MatrixXd mac)
    : energies_(std::move(energies)), names_(std::move(names)), densities_(std::move(densities)),
      mac_(std::move(mac)) {
    if (names_.empty() || densities_.size() != names_.size()) {
        throw DomainError("material table: need one density per material");
    }
    if (mac_.rows() != static_cast<Eigen::Index>(names_.size()) ||
        mac_.cols() != static_cast<Eigen::Index>(energies_.size())) {
        throw DomainError("material table: coefficient matrix must be materials x energies");
    }
    if (!std::is_sorted(energies_.begin(), energies_.end()) ||
        std::adjacent_find(energies_.begin(), energies_.end()) != energies_.end()) {
        throw DomainError("material table: energies must be strictly ascending");
    }
    if (!(mac_.array() > 0.0).all() || !mac_.allFinite()) {
        throw DomainError("material table: coefficients must be positive and finite");
    }
}

std::ptrdiff_t MaterialTable::energy_index(int energy_kev) const noexcept {
    const auto it = std::lower_bound(energies_.begin(), energies_.end(), energy_kev);
    if (it == energies_.end() || *it != energy_kev) {
        return -1;
    }
    return it - energies_.begin();
}

std::ptrdiff_t MaterialTable::material_index(const std::string& name) const noexcept {
    const auto it = std::find(names_.begin(), names_.end(), name);
    return it == names_.end() ? -1 : it - names_.begin();
}

bool MaterialTable::covers(const Spectrum& s) const noexcept {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.weights[i] > 0.0 && energy_index(s.energies[i]) < 0) {
            return false;
        }
    }
    return true;
}

MaterialTable MaterialTable::select(const std::vector<std::string>& names) const {
    Eigen::MatrixXd mac(static_cast<Eigen::Index>(names.size()), mac_.cols());
    std::vector<double> densities;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto m = material_index(names[i]);
        if (m < 0) {
            throw DomainError("material table: unknown material '" + names[i] + "'");
        }
        mac.row(static_cast<Eigen::Index>(i)) = mac_.row(m);
        densities.push_back(densities_[static_cast<std::size_t>(m)]);
    }
    return MaterialTable(energies_, names, std::move(densities), std::move(mac));
}

double mac_lookup(const MaterialTable& t, std::size_t material, int energy_kev) {
    if (material >= t.materials()) {
        throw DomainError("mac_lookup: material index " + std::to_string(material) + " out of range");
    }
    const auto e = t.energy_index(energy_kev);
    if (e < 0) {
        throw DomainError("mac_lookup: " + std::to_string(energy_kev) + " keV is not on the table grid");
    }
    return t.coefficients()(static_cast<Eigen::Index>(material), e);
}

MaterialTable load_material_table(const std::vector<MaterialFile>& files) {
    if (files.empty()) {
        throw LoadError("material table: no files given");
    }
    std::vector<int> grid;
    std::vector<std::vector<double>> columns;
    std::vector<std::string> names;
    std::vector<double> densities;
    for (const auto& f : files) {
        const auto rows = detail::read_two_columns(f.path);
        std::vector<int> energies;
        std::vector<double> values;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            energies.push_back(detail::integral_kev(rows[i].first, f.path, i + 1));
            if (!(rows[i].second > 0.0)) {
                throw LoadError(f.path.string() + ": coefficients must be positive");
            }
            values.push_back(rows[i].second);
        }
        if (grid.empty()) {
            grid = energies;
        } else if (energies != grid) {
            throw LoadError(f.path.string() + ": energy grid differs from " + files.front().path.string());
        }
        columns.push_back(std::move(values));
        names.push_back(f.name.empty() ? f.path.stem().string() : f.name);
        densities.push_back(f.density);
    }
    Eigen::MatrixXd mac(static_cast<Eigen::Index>(columns.size()), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t m = 0; m < columns.size(); ++m) {
        for (std::size_t e = 0; e < grid.size(); ++e) {
            mac(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(e)) = columns[m][e];
        }
    }
    try {
        return MaterialTable(std::move(grid), std::move(names), std::move(densities), std::move(mac));
    } catch (const DomainError& e) {
        throw LoadError(e.what());
    }
}

void save_mac(const MaterialTable& t, std::size_t material, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw LoadError("cannot write " + path.string());
    }
    out << "# " << t.names().at(material) << " mass attenuation, keV cm^2/g\n" << std::setprecision(17);
    for (std::size_t e = 0; e < t.energies().size(); ++e) {
        out << t.energies()[e] << ' '
            << t.coefficients()(static_cast<Eigen::Index>(material), static_cast<Eigen::Index>(e)) << '\n';
    }
}

} // namespace msct
