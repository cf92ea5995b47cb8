#pragma once

#include <functional>
#include <limits>
#include <iosfwd>
#include <optional>
#include <vector>

#include "msct/forward.hpp"
#include "msct/geometry.hpp"
#include "msct/soma.hpp"
#include "msct/spectra.hpp"

namespace msct {

enum class InterpMode { nearest, linear };

/**
 * How measurements of the other spectra are carried onto the reference rays
 * when geometries differ. `interpolated` resamples the measured sinogram once;
 * `model_corrected` resamples only the current data misfit p_k - G_k(R_k f)
 * every iteration and adds the model projection on the reference rays, so the
 * estimate becomes exact as the images converge.
 */
enum class InterceptMode { interpolated, model_corrected };

/// beta_n = beta0 * kappa_ratio^((n - 1) / total_n); kappa_ratio = 1 disables decay.
struct BetaDecay {
    double kappa_ratio = 1.0;
    int total_n = 1;
};

struct ReconConfig {
    ImageShape shape{128, 128, 3.0};
    double lambda = 0.9;         ///< image-domain relaxation
    SolveOptions solver;         ///< solver.beta0 is the initial step relaxation
    double t_thresh = 1.5;       ///< df_m threshold of the adaptive step rule
    double beta_red = 0.9;
    bool adaptive = true;
    BetaDecay beta_decay;
    int max_iters = 30;
    std::optional<double> stop_d_image;
    std::optional<double> stop_d_data;
    bool consistent = true;
    InterpMode interp = InterpMode::linear;
    InterceptMode intercept = InterceptMode::model_corrected;
    int art_sweeps = 1;          ///< sweeps inside R^-1 of the image update
    double art_relax = 1.0;
    int df_sweeps = 1;           ///< sweeps inside R^-1 of the df_m ratios
    double length_scale = kMillimetresToCentimetres;
    bool keep_snapshots = false;

    void validate() const;
};

struct IterationLog {
    int iter = 0;
    double d_data = 0.0;
    double d_image = 0.0; ///< NaN without ground truth
    double beta = 0.0;    ///< relaxation used by this iteration's sweeps
    bool reverted = false;
    double dp = 0.0;
    std::vector<double> df;
    long long skipped = 0;         ///< equations skipped as exhausted directions
    double min_denominator = std::numeric_limits<double>::infinity(); ///< smallest |g^T dir| divided by (inf when none)
    double seconds = 0.0;
};

struct ReconResult {
    std::vector<ImageGrid> images;
    std::vector<std::vector<ImageGrid>> snapshots;
    std::vector<Sinogram> q_sinograms; ///< R f of the final images, reference geometry
    std::vector<IterationLog> log;
    double beta_factor = 1.0;          ///< accumulated adaptive reductions
    int completed_iters = 0;
};

/// Enough to continue a run exactly where it stopped.
struct ResumeState {
    std::vector<ImageGrid> images;
    double beta_factor = 1.0;
    int completed_iters = 0;
};

/// Per-iteration view of the decomposition, for instrumentation.
struct IterationProbe {
    int iter = 0;
    const std::vector<Sinogram>* q_start = nullptr; ///< q^(n) = R f^(n)
    const std::vector<Sinogram>* q_first = nullptr; ///< after the first equation
    const std::vector<Sinogram>* q_full = nullptr;  ///< after all K equations
    const std::vector<Sinogram>* q_next = nullptr;  ///< accepted q^(n+1)
    bool reverted = false;
};
using ProbeFn = std::function<void(const IterationProbe&)>;

/// Value of `s_k` for the ray `target` (same detector index, view angle
/// interpolated with periodic wrap).
double estimate_projection(const Sinogram& s_k, const RayPath& target, InterpMode mode);

/// `s_k` resampled onto the rays of `reference` (same layout, other start angle).
Sinogram align_to(const Sinogram& s_k, const FanBeamGeometry& reference, InterpMode mode);

/**
 * One SOMA sweep per ray of the reference (first) geometry, linearized at
 * q_init. Other spectra use their own measurements when cfg.consistent,
 * otherwise values interpolated onto the reference rays.
 */
std::vector<Sinogram> decompose_all(const std::vector<Sinogram>& sinograms,
                                    const std::vector<Spectrum>& spectra, const MaterialTable& t,
                                    const std::vector<Sinogram>& q_init, const ReconConfig& cfg);

/// f_prev + lambda * ART(q_new - q_prev).
ImageGrid update_images(const ImageGrid& f_prev, const Sinogram& q_new, const Sinogram& q_prev,
                        const SystemMatrix& r, double lambda, int sweeps = 1, double relax = 1.0);

/// Decompose / reconstruct / update loop with adaptive step control.
ReconResult run_reconstruction(const std::vector<Sinogram>& measured,
                               const std::vector<Spectrum>& spectra, const MaterialTable& t,
                               const ReconConfig& cfg,
                               const std::vector<ImageGrid>* truth = nullptr,
                               const ResumeState* resume = nullptr, const ProbeFn& probe = {});

double beta_schedule(double beta0, double kappa_ratio, int n, int total_n);

/// mu(E) = sum_m theta_{m,E} f_m, in 1/cm for g/cm^3 images.
ImageGrid synth_monochromatic(const std::vector<ImageGrid>& images, const MaterialTable& t, int energy_kev);

/// CSV: iter,d_data,d_image,beta,reverted,dp,df_1..df_M,seconds
void write_log_csv(std::ostream& os, const std::vector<IterationLog>& log);

} // namespace msct
