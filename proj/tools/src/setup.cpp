#include "setup.hpp"

#include <charconv>
#include <fstream>

#include "msct/error.hpp"
#include "msct/parallel.hpp"

namespace msct::cli {

namespace fs = std::filesystem;

std::string format_exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

} // namespace

Config load_config(const CommonOptions& opts) {
    Config c = opts.config.empty() ? Config{} : Config::load(opts.config);
    c.set("run.command", opts.command);
    c.set("run.out", opts.out.string());
    if (!opts.config.empty()) c.set("run.config", fs::absolute(opts.config).string());
    if (opts.seed) c.set("noise.seed", std::to_string(*opts.seed));
    if (opts.threads) c.set("run.threads", std::to_string(*opts.threads));
    set_thread_count(c.get_int("run.threads", 0));
    return c;
}

ImageShape image_shape(const Config& c) {
    ImageShape s;
    s.nx = c.get_int("image.nx", 128);
    s.ny = c.get_int("image.ny", s.nx);
    s.pixel_size = c.get_double("image.pixel_size_mm", 3.0);
    if (s.nx < 1 || s.ny < 1 || !(s.pixel_size > 0.0)) throw ConfigError("config key 'image.nx': image must be non-empty");
    return s;
}

std::vector<FanBeamGeometry> geometries(const Config& c, std::size_t spectra) {
    FanBeamGeometry g;
    g.n_views = c.get_int("geometry.views", 360);
    g.n_det = c.get_int("geometry.detectors", 256);
    g.det_cell = c.get_double("geometry.det_cell_mm", 4.6875);
    g.sod = c.get_double("geometry.sod_mm", 541.0);
    g.sdd = c.get_double("geometry.sdd_mm", 949.0);
    g.angular_range = c.get_double("geometry.angular_range_deg", 360.0);
    try {
        g.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config section [geometry]: ") + e.what());
    }
    std::vector<double> offsets(spectra, 0.0);
    if (c.has("geometry.offsets_deg")) {
        offsets = c.get_doubles("geometry.offsets_deg");
        if (offsets.size() == 1) offsets.assign(spectra, offsets.front());
        if (offsets.size() != spectra) {
            throw ConfigError("config key 'geometry.offsets_deg': need one offset, or one per spectrum (" +
                              std::to_string(spectra) + ")");
        }
    } else {
        c.get_string("geometry.offsets_deg", "0");
    }
    std::vector<FanBeamGeometry> out;
    for (double o : offsets) {
        auto gk = g;
        gk.start_angle = o;
        out.push_back(gk);
    }
    return out;
}

Spectrum spectrum_from(const std::string& item, const fs::path& base) {
    const fs::path file = base.empty() ? fs::path(item) : base / item;
    if (fs::exists(file)) {
        auto s = normalize(load_spectrum(file));
        validate(s);
        return s;
    }
    return builtin::named_spectrum(item);
}

std::vector<Spectrum> spectra(const Config& c) {
    std::vector<Spectrum> out;
    for (const auto& item : c.get_list("scan.spectra")) {
        try {
            out.push_back(spectrum_from(item));
        } catch (const DomainError& e) {
            throw ConfigError(std::string("config key 'scan.spectra': ") + e.what());
        }
    }
    if (out.empty()) throw ConfigError("config key 'scan.spectra': no spectra listed");
    return out;
}

Phantom phantom(const Config& c) {
    const auto name = c.get_string("phantom.name", "thorax2");
    if (fs::exists(name)) return load_phantom(name);
    try {
        return builtin_phantom(name);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config key 'phantom.name': ") + e.what());
    }
}

MaterialTable material_table(const Config& c, const std::vector<std::string>& names) {
    if (c.get_string("materials.files", "builtin") == "builtin") {
        try {
            return builtin::reference_table(names);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("config key 'materials.files': ") + e.what());
        }
    }
    const auto files = c.get_list("materials.files");
    const auto densities = c.has("materials.densities") ? c.get_doubles("materials.densities")
                                                        : std::vector<double>(files.size(), 1.0);
    if (files.size() != names.size() || densities.size() != files.size()) {
        throw ConfigError("config key 'materials.files': need one file (and density) per material: " + join(names));
    }
    std::vector<MaterialFile> mf;
    for (std::size_t m = 0; m < files.size(); ++m) mf.push_back({files[m], names[m], densities[m]});
    return load_material_table(mf);
}

ReconConfig recon_config(const Config& c) {
    ReconConfig r;
    r.shape = image_shape(c);
    r.lambda = c.get_double("recon.lambda", r.lambda);
    r.max_iters = c.get_int("recon.max_iters", r.max_iters);
    r.adaptive = c.get_bool("recon.adaptive", r.adaptive);
    r.t_thresh = c.get_double("recon.t_thresh", r.t_thresh);
    r.beta_red = c.get_double("recon.beta_red", r.beta_red);
    r.beta_decay.kappa_ratio = c.get_double("recon.decay_ratio", r.beta_decay.kappa_ratio);
    r.beta_decay.total_n = c.get_int("recon.decay_length", r.max_iters);
    if (c.has("recon.stop_d_image")) r.stop_d_image = c.get_double("recon.stop_d_image");
    if (c.has("recon.stop_d_data")) r.stop_d_data = c.get_double("recon.stop_d_data");
    const auto interp = c.get_string("recon.interp", "linear");
    if (interp == "linear") r.interp = InterpMode::linear;
    else if (interp == "nearest") r.interp = InterpMode::nearest;
    else throw ConfigError("config key 'recon.interp': expected linear or nearest, got '" + interp + "'");
    const auto intercept = c.get_string("recon.intercept", "model_corrected");
    if (intercept == "model_corrected") r.intercept = InterceptMode::model_corrected;
    else if (intercept == "interpolated") r.intercept = InterceptMode::interpolated;
    else throw ConfigError("config key 'recon.intercept': expected model_corrected or interpolated");
    r.art_sweeps = c.get_int("recon.art_sweeps", r.art_sweeps);
    r.art_relax = c.get_double("recon.art_relax", r.art_relax);
    r.df_sweeps = c.get_int("recon.df_sweeps", r.df_sweeps);
    r.length_scale = c.get_double("recon.length_scale", r.length_scale);
    r.keep_snapshots = c.get_bool("output.snapshots", false);
    r.solver.beta0 = c.get_double("solver.beta0", r.solver.beta0);
    r.solver.eps = c.get_double("solver.eps", r.solver.eps);
    r.solver.kappa = c.get_double("solver.kappa", r.solver.kappa);
    r.solver.direction_tol = c.get_double("solver.direction_tol", r.solver.direction_tol);
    try {
        r.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return r;
}

Dtype dtype(const Config& c) {
    const auto name = c.get_string("output.dtype", "float64");
    if (name == "float64") return Dtype::float64;
    if (name == "float32") return Dtype::float32;
    throw ConfigError("config key 'output.dtype': expected float32 or float64, got '" + name + "'");
}

std::uint64_t seed(const Config& c) {
    const auto text = c.get_string("noise.seed", "1234");
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ConfigError("config key 'noise.seed': '" + text + "' is not a non-negative integer");
    }
    return v;
}

void write_manifest(const Config& c, const fs::path& dir) {
    std::ofstream out(dir / "manifest.ini");
    if (!out) throw LoadError("cannot write " + (dir / "manifest.ini").string());
    out << "# resolved parameters of this run; pass back with --config to reproduce it\n" << c.dump();
}

void write_dataset(const Dataset& d, const fs::path& dir, Dtype dt) {
    fs::create_directories(dir);
    Config index;
    std::vector<std::string> spectra_files;
    std::vector<std::string> sinogram_files;
    std::vector<std::string> mac_files;
    std::vector<std::string> densities;
    std::vector<std::string> truth_files;
    for (std::size_t k = 0; k < d.spectra.size(); ++k) {
        const auto tag = std::to_string(k + 1);
        save_spectrum(d.spectra[k], dir / ("spectrum_" + tag + ".txt"));
        write_sinogram(d.sinograms[k], dir / ("p_" + tag), dt);
        spectra_files.push_back("spectrum_" + tag + ".txt");
        sinogram_files.push_back("p_" + tag);
    }
    for (std::size_t m = 0; m < d.table.materials(); ++m) {
        const auto& name = d.table.names()[m];
        save_mac(d.table, m, dir / ("mac_" + name + ".txt"));
        mac_files.push_back("mac_" + name + ".txt");
        densities.push_back(format_exact(d.table.densities()[m]));
        if (!d.truth.empty()) {
            write_image(d.truth[m], dir / ("truth_" + name), dt, "g/cm^3", name);
            truth_files.push_back("truth_" + name);
        }
    }
    index.set("dataset.materials", join(d.table.names()));
    index.set("dataset.densities", join(densities));
    index.set("dataset.mac_files", join(mac_files));
    index.set("dataset.spectra", join(spectra_files));
    index.set("dataset.sinograms", join(sinogram_files));
    if (!truth_files.empty()) index.set("dataset.truth", join(truth_files));
    std::ofstream out(dir / "dataset.ini");
    out << index.dump();
    if (!out) throw LoadError("cannot write " + (dir / "dataset.ini").string());
}

Dataset read_dataset(const fs::path& dir) {
    if (!fs::exists(dir / "dataset.ini")) throw LoadError("no dataset.ini in " + dir.string());
    Config index;
    try {
        index = Config::load(dir / "dataset.ini");
        Dataset d;
        const auto names = index.get_list("dataset.materials");
        const auto macs = index.get_list("dataset.mac_files");
        const auto dens = index.get_doubles("dataset.densities");
        if (macs.size() != names.size() || dens.size() != names.size()) {
            throw LoadError(dir.string() + "/dataset.ini: material lists differ in length");
        }
        std::vector<MaterialFile> files;
        for (std::size_t m = 0; m < names.size(); ++m) files.push_back({dir / macs[m], names[m], dens[m]});
        d.table = load_material_table(files);
        const auto spectra = index.get_list("dataset.spectra");
        const auto sinos = index.get_list("dataset.sinograms");
        if (spectra.size() != sinos.size()) throw LoadError(dir.string() + "/dataset.ini: one sinogram per spectrum");
        for (std::size_t k = 0; k < spectra.size(); ++k) {
            d.spectra.push_back(normalize(load_spectrum(dir / spectra[k])));
            d.sinograms.push_back(read_sinogram(dir / sinos[k]));
        }
        if (index.has("dataset.truth")) {
            for (const auto& f : index.get_list("dataset.truth")) d.truth.push_back(read_image(dir / f));
            if (d.truth.size() != names.size()) throw LoadError(dir.string() + "/dataset.ini: one truth image per material");
        }
        return d;
    } catch (const ConfigError& e) {
        throw LoadError(dir.string() + "/dataset.ini: " + e.what());
    }
}

void write_state(const ResumeState& s, const MaterialTable& t, const fs::path& dir, Dtype dt) {
    for (std::size_t m = 0; m < t.materials(); ++m) {
        write_image(s.images[m], dir / ("f_" + t.names()[m]), dt, "g/cm^3", t.names()[m]);
    }
    Config state;
    state.set("state.completed_iters", std::to_string(s.completed_iters));
    state.set("state.beta_factor", format_exact(s.beta_factor));
    std::ofstream out(dir / "state.ini");
    out << state.dump();
    if (!out) throw LoadError("cannot write " + (dir / "state.ini").string());
}

ResumeState read_state(const MaterialTable& t, const fs::path& dir) {
    ResumeState s;
    try {
        const auto state = Config::load(dir / "state.ini");
        s.completed_iters = state.get_int("state.completed_iters");
        s.beta_factor = state.get_double("state.beta_factor");
    } catch (const ConfigError& e) {
        throw LoadError(dir.string() + "/state.ini: " + e.what());
    }
    for (const auto& name : t.names()) s.images.push_back(read_image(dir / ("f_" + name)));
    return s;
}

} // namespace msct::cli
