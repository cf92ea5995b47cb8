#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "msct/config.hpp"
#include "msct/forward.hpp"
#include "msct/geometry.hpp"
#include "msct/io.hpp"
#include "msct/phantom.hpp"
#include "msct/pipeline.hpp"
#include "msct/spectra.hpp"

namespace msct::cli {

/// Flags shared by every subcommand.
struct CommonOptions {
    std::string command;
    std::filesystem::path config;
    std::filesystem::path out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

/// Loads --config (empty when absent) and folds the flags into it.
Config load_config(const CommonOptions& opts);

ImageShape image_shape(const Config& c);
/// Geometry of spectrum k: the [geometry] layout with start angle offsets[k].
std::vector<FanBeamGeometry> geometries(const Config& c, std::size_t spectra);
/// A builtin spectrum name ("80kvp") or a two-column file, normalized.
Spectrum spectrum_from(const std::string& item, const std::filesystem::path& base = {});
std::vector<Spectrum> spectra(const Config& c);
Phantom phantom(const Config& c);
/// Builtin coefficients by name, or [materials] files when given.
MaterialTable material_table(const Config& c, const std::vector<std::string>& names);
ReconConfig recon_config(const Config& c);
Dtype dtype(const Config& c);
std::uint64_t seed(const Config& c);

void write_manifest(const Config& c, const std::filesystem::path& dir);

/// Everything `decompose` needs, as written by `simulate` (dataset.ini + arrays).
struct Dataset {
    std::vector<Sinogram> sinograms;
    std::vector<Spectrum> spectra;
    MaterialTable table;
    std::vector<ImageGrid> truth; ///< empty when the dataset has no ground truth
};

void write_dataset(const Dataset& d, const std::filesystem::path& dir, Dtype dtype);
Dataset read_dataset(const std::filesystem::path& dir);

/// Images and adaptive state written by `decompose`, enough to continue the run.
void write_state(const ResumeState& s, const MaterialTable& t, const std::filesystem::path& dir, Dtype dtype);
ResumeState read_state(const MaterialTable& t, const std::filesystem::path& dir);

std::string format_exact(double v);

} // namespace msct::cli
