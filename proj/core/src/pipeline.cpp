#include "msct/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>

#include "msct/error.hpp"
#include "msct/metrics.hpp"

namespace msct {

void ReconConfig::validate() const {
    auto fail = [](const std::string& what) { throw DomainError("reconstruction config: " + what); };
    if (shape.nx < 1 || shape.ny < 1 || !(shape.pixel_size > 0.0)) fail("image shape must be positive");
    if (!(lambda > 0.0 && lambda < 2.0)) fail("lambda must lie in (0, 2)");
    if (max_iters < 1) fail("max_iters must be >= 1");
    if (!(solver.beta0 > 0.0 && solver.beta0 <= 1.0)) fail("beta0 must lie in (0, 1]");
    if (!(solver.eps >= 0.0)) fail("eps must be >= 0");
    if (!(solver.kappa >= 0.0 && solver.kappa <= 1.0)) fail("kappa must lie in [0, 1]");
    if (!(t_thresh > 0.0)) fail("t_thresh must be > 0");
    if (!(beta_red > 0.0 && beta_red <= 1.0)) fail("beta_red must lie in (0, 1]");
    if (!(beta_decay.kappa_ratio > 0.0 && beta_decay.kappa_ratio <= 1.0)) fail("decay ratio must lie in (0, 1]");
    if (beta_decay.total_n < 1) fail("decay length must be >= 1");
    if (art_sweeps < 1 || df_sweeps < 1) fail("ART sweeps must be >= 1");
    if (!(art_relax > 0.0 && art_relax <= 2.0)) fail("ART relaxation must lie in (0, 2]");
    if (!(length_scale > 0.0)) fail("length_scale must be > 0");
}

double beta_schedule(double beta0, double kappa_ratio, int n, int total_n) {
    if (!(kappa_ratio > 0.0 && kappa_ratio <= 1.0) || n < 1 || total_n < 1) {
        throw DomainError("beta_schedule: needs 0 < kappa <= 1, n >= 1, N >= 1");
    }
    return beta0 * std::pow(kappa_ratio, static_cast<double>(n - 1) / total_n);
}

namespace {

bool full_circle(const FanBeamGeometry& g) { return std::abs(g.angular_range - 360.0) < 1e-9; }

// s at fractional view position u and detector `det`.
double sample_views(const Sinogram& s, double u, int det, InterpMode mode) {
    const int n = s.n_views();
    const bool wrap = full_circle(s.geometry);
    auto view = [&](long long v) {
        if (wrap) return static_cast<int>(((v % n) + n) % n);
        return static_cast<int>(std::clamp<long long>(v, 0, n - 1));
    };
    const double nearest = std::round(u);
    if (std::abs(u - nearest) < 1e-9 || mode == InterpMode::nearest || n == 1) {
        return s.at(view(static_cast<long long>(nearest)), det);
    }
    const double lower = std::floor(u);
    const double w = u - lower;
    const auto v0 = static_cast<long long>(lower);
    return (1.0 - w) * s.at(view(v0), det) + w * s.at(view(v0 + 1), det);
}

double view_position(const FanBeamGeometry& g, double angle_deg) {
    double delta = angle_deg - g.start_angle;
    if (full_circle(g)) {
        delta = std::fmod(delta, 360.0);
        if (delta < 0.0) delta += 360.0;
    }
    return delta / g.view_spacing();
}

double ratio(double num, double den) {
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

std::vector<PolyModel> make_models(const std::vector<Spectrum>& spectra, const MaterialTable& t) {
    std::vector<PolyModel> models;
    models.reserve(spectra.size());
    for (const auto& s : spectra) models.emplace_back(s, t);
    return models;
}

// Measurements on the reference rays: spectrum 1 as measured, the others
// either identical ray sets or interpolated onto them.
std::vector<Sinogram> reference_data(const std::vector<Sinogram>& sinograms, bool consistent, InterpMode mode) {
    const auto& ref = sinograms.front().geometry;
    std::vector<Sinogram> out;
    out.reserve(sinograms.size());
    out.push_back(sinograms.front());
    for (std::size_t k = 1; k < sinograms.size(); ++k) {
        if (consistent) {
            if (!sinograms[k].geometry.same_rays(ref)) {
                throw DomainError("sinogram " + std::to_string(k + 1) +
                                  " does not share the reference rays; run with consistent = false");
            }
            out.push_back(sinograms[k]);
        } else {
            out.push_back(align_to(sinograms[k], ref, mode));
        }
    }
    return out;
}

struct DecomposeOutput {
    std::vector<Sinogram> q_first;
    std::vector<Sinogram> q_full;
    double resid_first = 0.0; ///< sum over rays and spectra of (p - G(q_first))^2
    double resid_full = 0.0;
    long long skipped = 0;
    double min_denominator = std::numeric_limits<double>::infinity();
};

DecomposeOutput decompose_rays(const std::vector<Sinogram>& p, const std::vector<PolyModel>& models,
                               const std::vector<Sinogram>& q_start, const SolveOptions& opts, double beta,
                               bool residuals) {
    const auto& ref = q_start.front().geometry;
    const std::size_t n_mat = q_start.size();
    const std::size_t n_spec = p.size();
    const std::size_t n_rays = ref.n_rays();
    for (const auto& s : p) {
        if (s.data.size() != n_rays) throw DomainError("decompose: sinogram size does not match q_init");
    }
    DecomposeOutput out;
    for (std::size_t m = 0; m < n_mat; ++m) {
        out.q_first.push_back(Sinogram::zeros(ref, q_start[m].label));
        out.q_full.push_back(Sinogram::zeros(ref, q_start[m].label));
    }
    std::vector<double> r_first(residuals ? n_rays : 0);
    std::vector<double> r_full(residuals ? n_rays : 0);
    std::vector<int> skipped(n_rays, 0);
    std::vector<double> min_den(n_rays, std::numeric_limits<double>::infinity());

    std::exception_ptr failure;
    std::mutex failure_lock;
    const auto n = static_cast<std::ptrdiff_t>(n_rays);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ri = 0; ri < n; ++ri) {
        const auto r = static_cast<std::size_t>(ri);
        try {
            Vec q0(static_cast<Eigen::Index>(n_mat));
            for (std::size_t m = 0; m < n_mat; ++m) q0[static_cast<Eigen::Index>(m)] = q_start[m].data[r];
            LinearizedEq eqs[kMaxMaterials * 4];
            std::vector<LinearizedEq> heap;
            LinearizedEq* eq = eqs;
            if (n_spec > std::size(eqs)) {
                heap.resize(n_spec);
                eq = heap.data();
            }
            for (std::size_t k = 0; k < n_spec; ++k) eq[k] = models[k].linearize(q0, p[k].data[r]);

            SolverState st;
            st.x = q0;
            st.beta = beta;
            st.kappa = opts.kappa;
            st.eps = opts.eps;
            Vec first = q0;
            SweepStats stats;
            sweep_in_place(st, std::span<const LinearizedEq>(eq, n_spec), opts, &stats,
                           [&](const StepRecord& rec) {
                               if (rec.k == 1) first = rec.x;
                           });
            for (std::size_t m = 0; m < n_mat; ++m) {
                out.q_first[m].data[r] = first[static_cast<Eigen::Index>(m)];
                out.q_full[m].data[r] = st.x[static_cast<Eigen::Index>(m)];
            }
            skipped[r] = stats.skipped;
            min_den[r] = stats.min_denominator;
            if (residuals) {
                double a = 0.0;
                double b = 0.0;
                for (std::size_t k = 0; k < n_spec; ++k) {
                    const double e1 = p[k].data[r] - models[k].project(first);
                    const double ek = p[k].data[r] - models[k].project(st.x);
                    a += e1 * e1;
                    b += ek * ek;
                }
                r_first[r] = a;
                r_full[r] = b;
            }
        } catch (...) {
            std::lock_guard lock(failure_lock);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t r = 0; r < n_rays; ++r) {
        out.skipped += skipped[r];
        out.min_denominator = std::min(out.min_denominator, min_den[r]);
    }
    if (residuals) {
        for (std::size_t r = 0; r < n_rays; ++r) {
            out.resid_first += r_first[r];
            out.resid_full += r_full[r];
        }
    }
    return out;
}

// G_k of per-material line integrals, ray by ray.
Sinogram project_rays(const PolyModel& model, const std::vector<Sinogram>& q, const FanBeamGeometry& g,
                      const std::string& label) {
    Sinogram s = Sinogram::zeros(g, label);
    const std::size_t n_mat = q.size();
    const auto rays = static_cast<std::ptrdiff_t>(s.data.size());
    std::exception_ptr failure;
    std::mutex failure_lock;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ri = 0; ri < rays; ++ri) {
        const auto r = static_cast<std::size_t>(ri);
        double buf[kMaxMaterials];
        for (std::size_t m = 0; m < n_mat; ++m) buf[m] = q[m].data[r];
        try {
            s.data[r] = model.project(std::span<const double>(buf, n_mat));
        } catch (...) {
            std::lock_guard lock(failure_lock);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return s;
}

Sinogram difference(const Sinogram& a, const Sinogram& b) {
    Sinogram d = a;
    for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] -= b.data[i];
    return d;
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

double estimate_projection(const Sinogram& s_k, const RayPath& target, InterpMode mode) {
    if (target.det < 0 || target.det >= s_k.n_det()) {
        throw DomainError("estimate_projection: detector index out of range");
    }
    const double angle = std::atan2(target.source.y, target.source.x) * 180.0 / std::numbers::pi;
    return sample_views(s_k, view_position(s_k.geometry, angle), target.det, mode);
}

Sinogram align_to(const Sinogram& s_k, const FanBeamGeometry& reference, InterpMode mode) {
    if (s_k.n_det() != reference.n_det) {
        throw DomainError("align_to: detector counts differ (" + std::to_string(s_k.n_det()) + " vs " +
                          std::to_string(reference.n_det) + ")");
    }
    Sinogram out = Sinogram::zeros(reference, s_k.label);
    for (int v = 0; v < reference.n_views; ++v) {
        const double u = view_position(s_k.geometry, reference.view_angle(v));
        for (int d = 0; d < reference.n_det; ++d) out.at(v, d) = sample_views(s_k, u, d, mode);
    }
    return out;
}

std::vector<Sinogram> decompose_all(const std::vector<Sinogram>& sinograms, const std::vector<Spectrum>& spectra,
                                    const MaterialTable& t, const std::vector<Sinogram>& q_init,
                                    const ReconConfig& cfg) {
    if (sinograms.empty() || sinograms.size() != spectra.size()) {
        throw DomainError("decompose_all: need one sinogram per spectrum");
    }
    if (q_init.size() != t.materials()) throw DomainError("decompose_all: need one q sinogram per material");
    for (const auto& q : q_init) {
        if (!q.geometry.same_rays(sinograms.front().geometry)) {
            throw DomainError("decompose_all: q_init is not on the reference geometry");
        }
    }
    const auto p = reference_data(sinograms, cfg.consistent, cfg.interp);
    return decompose_rays(p, make_models(spectra, t), q_init, cfg.solver, cfg.solver.beta0, false).q_full;
}

ImageGrid update_images(const ImageGrid& f_prev, const Sinogram& q_new, const Sinogram& q_prev,
                        const SystemMatrix& r, double lambda, int sweeps, double relax) {
    if (!(f_prev.shape == r.shape())) throw DomainError("update_images: image shape mismatch");
    const ImageGrid delta = r.art(difference(q_new, q_prev), sweeps, relax);
    ImageGrid f = f_prev;
    for (std::size_t j = 0; j < f.values.size(); ++j) f.values[j] += lambda * delta.values[j];
    return f;
}

ReconResult run_reconstruction(const std::vector<Sinogram>& measured, const std::vector<Spectrum>& spectra,
                               const MaterialTable& t, const ReconConfig& cfg,
                               const std::vector<ImageGrid>* truth, const ResumeState* resume,
                               const ProbeFn& probe) {
    cfg.validate();
    const std::size_t n_spec = measured.size();
    const std::size_t n_mat = t.materials();
    if (n_spec == 0 || n_spec != spectra.size()) throw DomainError("run_reconstruction: need one sinogram per spectrum");
    if (n_spec < n_mat) {
        throw DomainError("run_reconstruction: " + std::to_string(n_mat) + " materials need at least as many spectra");
    }
    if (truth && truth->size() != n_mat) throw DomainError("run_reconstruction: need one truth image per material");

    const auto models = make_models(spectra, t);
    const auto p_ref = reference_data(measured, cfg.consistent, cfg.interp);

    // One operator per distinct geometry; index 0 is the reference.
    std::vector<SystemMatrix> operators;
    std::vector<std::size_t> op_of(n_spec);
    for (std::size_t k = 0; k < n_spec; ++k) {
        const auto& g = measured[k].geometry;
        auto hit = std::find_if(operators.begin(), operators.end(),
                                [&](const SystemMatrix& r) { return r.geometry().same_rays(g); });
        if (hit == operators.end()) {
            operators.emplace_back(g, cfg.shape, cfg.length_scale);
            hit = std::prev(operators.end());
        }
        op_of[k] = static_cast<std::size_t>(hit - operators.begin());
    }
    const SystemMatrix& r_ref = operators.front();

    ReconResult res;
    if (resume) {
        if (resume->images.size() != n_mat) throw DomainError("resume: need one image per material");
        for (const auto& img : resume->images) {
            if (!(img.shape == cfg.shape)) throw DomainError("resume: image shape does not match the config");
        }
        res.images = resume->images;
        res.beta_factor = resume->beta_factor;
        res.completed_iters = resume->completed_iters;
    } else {
        for (std::size_t m = 0; m < n_mat; ++m) res.images.push_back(ImageGrid::zeros(cfg.shape));
    }

    auto project_all = [&](const SystemMatrix& r) {
        std::vector<Sinogram> q;
        for (std::size_t m = 0; m < n_mat; ++m) {
            q.push_back(r.forward(res.images[m]));
            q.back().label = t.names()[m];
        }
        return q;
    };

    // R f on every distinct geometry and the model projections of every spectrum on its own rays.
    auto reproject = [&](int iter) {
        std::vector<std::vector<Sinogram>> q_by_op(operators.size());
        std::vector<Sinogram> p;
        try {
            for (std::size_t k = 0; k < n_spec; ++k) {
                auto& q = q_by_op[op_of[k]];
                if (q.empty()) q = project_all(operators[op_of[k]]);
                p.push_back(project_rays(models[k], q, measured[k].geometry, measured[k].label));
            }
        } catch (const Error& e) {
            throw DivergenceError("iteration " + std::to_string(iter) + ": " + e.what());
        }
        return std::pair{std::move(q_by_op[0]), std::move(p)};
    };

    auto [q_n, p_est] = reproject(res.completed_iters);
    const bool model_intercept = !cfg.consistent && cfg.intercept == InterceptMode::model_corrected;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const auto t0 = std::chrono::steady_clock::now();
        const int n = res.completed_iters + 1;
        IterationLog entry;
        entry.iter = n;
        entry.beta = beta_schedule(cfg.solver.beta0, cfg.beta_decay.kappa_ratio, n, cfg.beta_decay.total_n) *
                     res.beta_factor;

        std::vector<Sinogram> p_model;
        if (model_intercept) {
            // Interpolate only the data misfit; the model supplies the rest on the reference rays.
            p_model.push_back(p_ref.front());
            for (std::size_t k = 1; k < n_spec; ++k) {
                auto est = align_to(difference(measured[k], p_est[k]), r_ref.geometry(), cfg.interp);
                const auto here = project_rays(models[k], q_n, r_ref.geometry(), measured[k].label);
                for (std::size_t r = 0; r < est.data.size(); ++r) est.data[r] += here.data[r];
                p_model.push_back(std::move(est));
            }
        }
        auto dec = decompose_rays(model_intercept ? p_model : p_ref, models, q_n, cfg.solver, entry.beta,
                                  cfg.adaptive);
        entry.skipped = dec.skipped;
        entry.min_denominator = dec.min_denominator;
        entry.dp = ratio(dec.resid_full, dec.resid_first);

        if (cfg.adaptive) {
            for (std::size_t m = 0; m < n_mat; ++m) {
                const auto full = r_ref.art(dec.q_full[m], cfg.df_sweeps, cfg.art_relax);
                const auto first = r_ref.art(dec.q_first[m], cfg.df_sweeps, cfg.art_relax);
                double num = 0.0;
                double den = 0.0;
                for (std::size_t j = 0; j < full.values.size(); ++j) {
                    const double a = res.images[m].values[j] - full.values[j];
                    const double b = res.images[m].values[j] - first.values[j];
                    num += a * a;
                    den += b * b;
                }
                entry.df.push_back(ratio(num, den));
            }
            const auto decision = adapt_beta(entry.dp, entry.df, cfg.t_thresh, res.beta_factor, cfg.beta_red);
            entry.reverted = decision.revert;
            res.beta_factor = decision.beta;
        }
        const std::vector<Sinogram>& q_next = entry.reverted ? dec.q_first : dec.q_full;

        for (std::size_t m = 0; m < n_mat; ++m) {
            res.images[m] =
                update_images(res.images[m], q_next[m], q_n[m], r_ref, cfg.lambda, cfg.art_sweeps, cfg.art_relax);
            if (!all_finite(res.images[m].values)) {
                throw DivergenceError("iteration " + std::to_string(n) + ": non-finite values in the " +
                                      t.names()[m] + " image");
            }
        }

        if (probe) {
            IterationProbe info;
            info.iter = n;
            info.q_start = &q_n;
            info.q_first = &dec.q_first;
            info.q_full = &dec.q_full;
            info.q_next = &q_next;
            info.reverted = entry.reverted;
            probe(info);
        }

        auto [q_next_ref, p_next] = reproject(n);
        p_est = std::move(p_next);
        entry.d_data = distance_data(measured, p_est);
        entry.d_image = truth ? distance_image(*truth, res.images) : std::numeric_limits<double>::quiet_NaN();
        if (!std::isfinite(entry.d_data)) {
            throw DivergenceError("iteration " + std::to_string(n) + ": data distance is not finite");
        }
        q_n = std::move(q_next_ref);

        res.completed_iters = n;
        entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.log.push_back(entry);
        if (cfg.keep_snapshots) res.snapshots.push_back(res.images);

        if (cfg.stop_d_data && entry.d_data <= *cfg.stop_d_data) break;
        if (cfg.stop_d_image && truth && entry.d_image <= *cfg.stop_d_image) break;
    }
    res.q_sinograms = std::move(q_n);
    return res;
}

ImageGrid synth_monochromatic(const std::vector<ImageGrid>& images, const MaterialTable& t, int energy_kev) {
    const auto e = t.energy_index(energy_kev);
    if (e < 0) throw DomainError("synth_monochromatic: " + std::to_string(energy_kev) + " keV is not on the table grid");
    if (images.size() != t.materials() || images.empty()) {
        throw DomainError("synth_monochromatic: need one image per material");
    }
    ImageGrid mu = ImageGrid::zeros(images.front().shape);
    for (std::size_t m = 0; m < images.size(); ++m) {
        if (!(images[m].shape == mu.shape)) throw DomainError("synth_monochromatic: image shapes differ");
        const double theta = t.coefficients()(static_cast<Eigen::Index>(m), e);
        for (std::size_t j = 0; j < mu.values.size(); ++j) mu.values[j] += theta * images[m].values[j];
    }
    return mu;
}

void write_log_csv(std::ostream& os, const std::vector<IterationLog>& log) {
    const std::size_t n_df = log.empty() ? 0 : log.front().df.size();
    os << "iter,d_data,d_image,beta,reverted,dp";
    for (std::size_t m = 0; m < n_df; ++m) os << ",df_" << m + 1;
    os << ",seconds\n";
    const auto old = os.precision(17);
    for (const auto& e : log) {
        os << e.iter << ',' << e.d_data << ',' << e.d_image << ',' << e.beta << ',' << (e.reverted ? 1 : 0) << ','
           << e.dp;
        for (std::size_t m = 0; m < n_df; ++m) os << ',' << (m < e.df.size() ? e.df[m] : 0.0);
        os << ',' << e.seconds << '\n';
    }
    os.precision(old);
}

} // namespace msct
