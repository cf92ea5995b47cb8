#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "msct/error.hpp"
#include "msct/spectra.hpp"

namespace msct::builtin {

namespace {

struct Anchor {
    double kev;
    double mac;
};

// A material's tabulated coefficients as one or more log-log segments; a new
// segment starts at each absorption edge.
struct AnchorTable {
    const char* name;
    double density;
    std::vector<std::vector<Anchor>> segments;
};

// Total attenuation with coherent scattering, cm^2/g, rounded from the NIST
// XCOM tables.
const std::vector<AnchorTable>& anchor_tables() {
    static const std::vector<AnchorTable> tables = {
        {"water", 1.00,
         {{{20, 0.8096}, {30, 0.3756}, {40, 0.2683}, {50, 0.2269}, {60, 0.2059},
           {80, 0.1837}, {100, 0.1707}, {150, 0.1505}}}},
        {"bone", 1.92,
         {{{20, 4.001}, {30, 1.331}, {40, 0.6655}, {50, 0.4242}, {60, 0.3148},
           {80, 0.2229}, {100, 0.1855}, {150, 0.1480}}}},
        {"gold", 19.32,
         {{{20, 78.83}, {30, 27.75}, {40, 12.89}, {50, 7.256}, {60, 4.528}, {80, 2.185},
           {80.725, 2.150}},
          {{80.725, 8.904}, {100, 5.158}, {150, 1.859}}}},
        {"aluminium", 2.699,
         {{{20, 3.441}, {30, 1.128}, {40, 0.5685}, {50, 0.3681}, {60, 0.2778},
           {80, 0.2018}, {100, 0.1704}, {150, 0.1378}}}},
        {"copper", 8.96,
         {{{20, 33.79}, {30, 10.92}, {40, 4.862}, {50, 2.613}, {60, 1.593},
           {80, 0.7630}, {100, 0.4584}, {150, 0.2217}}}},
    };
    return tables;
}

constexpr int kGridLo = 20;
constexpr int kGridHi = 150;

double interpolate(const AnchorTable& table, double kev) {
    for (const auto& seg : table.segments) {
        if (kev < seg.front().kev || kev > seg.back().kev) {
            continue;
        }
        // Inside a segment whose upper end is an edge, the energy exactly at
        // the edge belongs to the next segment.
        if (&seg != &table.segments.back() && kev == seg.back().kev) {
            continue;
        }
        for (std::size_t i = 1; i < seg.size(); ++i) {
            if (kev <= seg[i].kev) {
                const double t = std::log(kev / seg[i - 1].kev) / std::log(seg[i].kev / seg[i - 1].kev);
                return std::exp(std::log(seg[i - 1].mac) + t * std::log(seg[i].mac / seg[i - 1].mac));
            }
        }
        return seg.back().mac;
    }
    throw DomainError(std::string("reference table: ") + std::to_string(kev) + " keV outside " + table.name);
}

} // namespace

Spectrum toy_spectrum(int index) {
    Spectrum s;
    s.step_kev = 10;
    s.allow_unnormalized = true;
    if (index == 0) {
        s.energies = {30, 40};
        s.weights = {0.0002, 0.0009};
        s.label = "toy-low";
    } else if (index == 1) {
        s.energies = {120, 130};
        s.weights = {0.0056, 0.0029};
        s.label = "toy-high";
    } else {
        throw DomainError("toy_spectrum: index must be 0 or 1");
    }
    return s;
}

MaterialTable toy_table() {
    Eigen::MatrixXd mac(2, 4);
    mac << 0.2812, 0.1342, 0.0328, 0.0314,  // bone
           0.0395, 0.0281, 0.0159, 0.0154;  // water
    return MaterialTable({30, 40, 120, 130}, {"bone", "water"}, {1.92, 1.00}, std::move(mac));
}

MaterialTable reference_table() {
    const auto& tables = anchor_tables();
    std::vector<int> grid;
    for (int e = kGridLo; e <= kGridHi; ++e) {
        grid.push_back(e);
    }
    Eigen::MatrixXd mac(static_cast<Eigen::Index>(tables.size()), static_cast<Eigen::Index>(grid.size()));
    std::vector<std::string> names;
    std::vector<double> densities;
    for (std::size_t m = 0; m < tables.size(); ++m) {
        names.emplace_back(tables[m].name);
        densities.push_back(tables[m].density);
        for (std::size_t e = 0; e < grid.size(); ++e) {
            mac(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(e)) = interpolate(tables[m], grid[e]);
        }
    }
    return MaterialTable(std::move(grid), std::move(names), std::move(densities), std::move(mac));
}

MaterialTable reference_table(const std::vector<std::string>& names) {
    return reference_table().select(names);
}

Spectrum tube_spectrum(int kvp, double aluminium_mm, double copper_mm, std::string label) {
    if (kvp <= kGridLo + 1 || kvp > kGridHi + 1) {
        throw DomainError("tube_spectrum: kVp must lie in (" + std::to_string(kGridLo + 1) + ", " +
                          std::to_string(kGridHi + 1) + "]");
    }
    const auto table = reference_table();
    const auto al = static_cast<std::size_t>(table.material_index("aluminium"));
    const auto cu = static_cast<std::size_t>(table.material_index("copper"));

    Spectrum s;
    s.label = std::move(label);
    for (int e = kGridLo; e < kvp; ++e) {
        // Kramers photon-number continuum.
        double n = static_cast<double>(kvp - e) / e;
        // Tungsten K lines once the tube voltage exceeds the K edge.
        if (kvp > 70) {
            if (e == 58) n *= 1.8;
            if (e == 59) n *= 2.6;
            if (e == 67) n *= 1.9;
        }
        const double tau = mac_lookup(table, al, e) * table.densities()[al] * aluminium_mm * 0.1 +
                           mac_lookup(table, cu, e) * table.densities()[cu] * copper_mm * 0.1;
        s.energies.push_back(e);
        s.weights.push_back(n * std::exp(-tau));
    }
    return normalize(s);
}

Spectrum named_spectrum(const std::string& name) {
    if (name == "40kvp") return tube_spectrum(40, 2.5, 0.0, name);
    if (name == "80kvp") return tube_spectrum(80, 2.5, 0.0, name);
    if (name == "140kvp") return tube_spectrum(140, 2.5, 1.0, name);
    throw DomainError("unknown builtin spectrum '" + name + "' (expected 40kvp, 80kvp or 140kvp)");
}

} // namespace msct::builtin
