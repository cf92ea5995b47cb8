#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "msct/error.hpp"
#include "msct/metrics.hpp"
#include "msct/soma.hpp"

namespace msct::cli {

namespace fs = std::filesystem;

namespace {

void write_metrics_csv(std::ostream& os, const std::vector<std::string>& names, const MetricReport& r) {
    os << std::setprecision(10) << "material,psnr_db,ssim,rmse\n";
    for (std::size_t m = 0; m < names.size(); ++m) {
        os << names[m] << ',' << r.psnr[m] << ',' << r.ssim[m] << ',' << r.rmse[m] << '\n';
    }
    os << "d_image," << r.d_image << ",,\n";
}

void write_previews(const std::vector<ImageGrid>& images, const std::vector<std::string>& names,
                    const std::vector<ImageGrid>& truth, const Config& c, const fs::path& dir) {
    const bool fixed = c.has("output.preview_window");
    const auto window = fixed ? c.get_doubles("output.preview_window") : std::vector<double>{};
    if (fixed && window.size() != 2) throw ConfigError("config key 'output.preview_window': expected 'lo, hi'");
    for (std::size_t m = 0; m < images.size(); ++m) {
        double lo = 0.0;
        double hi = 0.0;
        if (fixed) {
            lo = window[0];
            hi = window[1];
        } else {
            const auto& src = truth.empty() ? images[m].values : truth[m].values;
            hi = *std::max_element(src.begin(), src.end());
            if (!(hi > lo)) hi = lo + 1.0;
        }
        write_preview(images[m], lo, hi, dir / ("f_" + names[m] + ".pgm"));
    }
}

} // namespace

int cmd_simulate(const CommonOptions& opts) {
    const Config c = load_config(opts);
    const auto ph = phantom(c);
    std::vector<std::string> names = ph.material_names;
    if (c.has("materials.names")) names = c.get_list("materials.names");
    if (names.size() != ph.materials) {
        throw ConfigError("config key 'materials.names': phantom has " + std::to_string(ph.materials) + " materials");
    }
    Dataset d;
    d.table = material_table(c, names);
    d.spectra = spectra(c);
    const auto shape = image_shape(c);
    const auto geos = geometries(c, d.spectra.size());
    const double length_scale = c.get_double("recon.length_scale", kMillimetresToCentimetres);
    d.truth = rasterize(ph, shape);
    d.sinograms = simulate_acquisition(d.truth, geos, d.spectra, d.table, length_scale);
    const double i0 = c.get_double("noise.i0", 0.0);
    if (i0 > 0.0) {
        const auto base = seed(c);
        for (std::size_t k = 0; k < d.sinograms.size(); ++k) {
            d.sinograms[k] = add_poisson_noise(d.sinograms[k], i0, base + k);
        }
    } else {
        c.get_string("noise.seed", "1234");
    }
    for (std::size_t k = 0; k < d.sinograms.size(); ++k) d.sinograms[k].label = d.spectra[k].label;

    write_dataset(d, opts.out, dtype(c));
    write_manifest(c, opts.out);
    std::cout << "wrote " << d.sinograms.size() << " sinograms and " << d.truth.size() << " material images to "
              << opts.out.string() << '\n';
    return 0;
}

int cmd_decompose(const CommonOptions& opts, const DecomposeOptions& extra) {
    Config c = load_config(opts);
    if (!extra.data.empty()) c.set("data.dir", extra.data.string());
    if (!extra.resume.empty()) c.set("recon.resume", extra.resume.string());
    const auto data = read_dataset(c.get_string("data.dir"));
    auto cfg = recon_config(c);
    const auto& ref = data.sinograms.front().geometry;
    const bool same = std::all_of(data.sinograms.begin(), data.sinograms.end(),
                                  [&](const Sinogram& s) { return s.geometry.same_rays(ref); });
    cfg.consistent = c.get_bool("recon.consistent", same);
    const auto dt = dtype(c);
    const bool use_truth = c.get_bool("recon.use_truth", true) && !data.truth.empty();
    const auto* truth = use_truth ? &data.truth : nullptr;

    std::optional<ResumeState> resume;
    if (c.has("recon.resume")) resume = read_state(data.table, c.get_string("recon.resume"));

    fs::create_directories(opts.out);
    write_manifest(c, opts.out);
    const auto result = run_reconstruction(data.sinograms, data.spectra, data.table, cfg, truth,
                                           resume ? &*resume : nullptr);

    const auto& names = data.table.names();
    write_state({result.images, result.beta_factor, result.completed_iters}, data.table, opts.out, dt);
    for (std::size_t m = 0; m < names.size(); ++m) {
        write_sinogram(result.q_sinograms[m], opts.out / ("q_" + names[m]), dt, "g/cm^2");
    }
    for (std::size_t s = 0; s < result.snapshots.size(); ++s) {
        const auto dir = opts.out / "snapshots" / std::to_string(result.log[s].iter);
        fs::create_directories(dir);
        for (std::size_t m = 0; m < names.size(); ++m) {
            write_image(result.snapshots[s][m], dir / ("f_" + names[m]), dt, "g/cm^3", names[m]);
        }
    }
    {
        std::ofstream log(opts.out / "convergence.csv");
        write_log_csv(log, result.log);
    }
    if (c.has("output.mono_kev")) {
        for (double kev : c.get_doubles("output.mono_kev")) {
            const int e = static_cast<int>(std::lround(kev));
            write_image(synth_monochromatic(result.images, data.table, e), opts.out / ("mono_" + std::to_string(e) + "kev"),
                        dt, "1/cm", std::to_string(e) + " keV");
        }
    }
    if (truth) {
        std::ofstream out(opts.out / "metrics.csv");
        write_metrics_csv(out, names, compare(*truth, result.images));
    }
    if (extra.preview || c.get_bool("output.preview", false)) {
        write_previews(result.images, names, data.truth, c, opts.out);
    }
    write_manifest(c, opts.out);

    const auto& last = result.log.back();
    std::cout << "iteration " << last.iter << ": D_data " << last.d_data;
    if (truth) std::cout << ", D_image " << last.d_image;
    std::cout << "; results in " << opts.out.string() << '\n';
    return 0;
}

int cmd_toy(const CommonOptions& opts) {
    const Config c = load_config(opts);
    SolveOptions so;
    so.beta0 = c.get_double("toy.beta", 1.0);
    so.kappa = c.get_double("toy.kappa", 1.0);
    so.eps = c.get_double("toy.eps", so.eps);
    so.max_outer = c.get_int("toy.max_outer", 20);
    so.tol_residual = c.get_double("toy.tol_residual", so.tol_residual);
    const auto truth = c.has("toy.truth") ? c.get_doubles("toy.truth") : std::vector<double>{1.0, 4.0};
    const auto start = c.has("toy.start") ? c.get_doubles("toy.start") : std::vector<double>{0.0, 0.0};
    if (truth.size() != 2 || start.size() != 2) throw ConfigError("config keys 'toy.truth' and 'toy.start' take two values");

    const auto table = builtin::toy_table();
    Vec x_true(2);
    x_true << truth[0], truth[1];
    Vec x0(2);
    x0 << start[0], start[1];
    std::vector<EquationBuilder> builders;
    std::vector<double> targets;
    for (int k = 0; k < 2; ++k) {
        const PolyModel model(builtin::toy_spectrum(k), table);
        targets.push_back(model.project(x_true));
        builders.push_back([model, p = targets.back()](const Vec& x) { return model.linearize(x, p); });
    }
    const auto soma = solve_system(x0, builders, so);
    const auto newton = newton_solve(x0, builders, so);

    fs::create_directories(opts.out);
    {
        std::ofstream out(opts.out / "path_soma.csv");
        write_trace_csv(out, soma.trace, "soma");
    }
    {
        std::ofstream out(opts.out / "path_newton.csv");
        write_trace_csv(out, newton.trace, "newton");
    }
    write_manifest(c, opts.out);

    std::cout << std::setprecision(10) << "targets p1 = " << targets[0] << ", p2 = " << targets[1] << '\n'
              << "soma:   x = (" << soma.x[0] << ", " << soma.x[1] << ") after " << soma.outer_iterations
              << " outer iterations\n"
              << "newton: x = (" << newton.x[0] << ", " << newton.x[1] << ") after " << newton.outer_iterations
              << " iterations\n";
    return soma.converged ? 0 : 3;
}

int cmd_metrics(const CommonOptions& opts, const MetricsOptions& extra) {
    const Config c = load_config(opts);
    if (extra.reference.size() != extra.estimate.size() || extra.reference.empty()) {
        throw ConfigError("metrics: give the same number of --ref and --est images");
    }
    std::vector<ImageGrid> ref;
    std::vector<ImageGrid> est;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < extra.reference.size(); ++i) {
        ref.push_back(read_image(extra.reference[i]));
        est.push_back(read_image(extra.estimate[i]));
        if (!(ref.back().shape == est.back().shape)) {
            throw LoadError(extra.reference[i].string() + " and " + extra.estimate[i].string() + " differ in size");
        }
        names.push_back(extra.reference[i].stem().string());
    }
    const auto report = compare(ref, est);
    write_metrics_csv(std::cout, names, report);
    if (!opts.out.empty()) {
        fs::create_directories(opts.out);
        std::ofstream out(opts.out / "metrics.csv");
        write_metrics_csv(out, names, report);
        write_manifest(c, opts.out);
    }
    return 0;
}

} // namespace msct::cli
