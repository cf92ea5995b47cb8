#pragma once

#include <functional>
#include <limits>
#include <string>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "msct/forward.hpp"
#include "msct/types.hpp"

namespace msct {

struct SolveOptions {
    double beta0 = 0.9;          ///< step relaxation
    double eps = 1e-8;           ///< guard in the correction-matrix denominator
    double kappa = 1.0;          ///< blend between orthogonal (1) and normal (0) direction
    int max_outer = 50;
    double tol_residual = 1e-20; ///< stop when sum_k (p_k - G_k(x))^2 falls to this
    double direction_tol = 1e-10;///< |d| <= direction_tol |g| marks an exhausted direction
};

/// Iterate plus the orthogonal correction matrix of the current sweep.
struct SolverState {
    Vec x;
    Mat p_mat;
    double beta = 1.0;
    double kappa = 1.0;
    double eps = 1e-8;
    int sweep_count = 0;
    int outer_count = 0;

    static SolverState start(const Vec& x0, const SolveOptions& opts);
};

struct SchmidtStep {
    Vec d;
    Mat p_next;
};

/// d = P g and P' = P - d d^T / (d^T d + eps).
SchmidtStep schmidt_step(const Mat& p_mat, const Vec& g, double eps);

/// alpha = (b - A x) / (g^T d); empty when |g^T d| <= tiny (direction exhausted).
std::optional<double> step_size(const LinearizedEq& eq, const Vec& d, const Vec& x, double tiny = 0.0);

struct StepRecord {
    int k = 0;            ///< 1-based equation index
    bool skipped = false;
    double alpha = 0.0;
    double denominator = 0.0; ///< g^T dir actually divided by
    Vec x;                ///< iterate after the step
};

struct SweepStats {
    int steps = 0;
    int skipped = 0;
    double min_denominator = std::numeric_limits<double>::infinity();
};

/**
 * One pass over the equations in order: reset P to I, then for every k
 * orthogonalize g_k, move x by beta * alpha_k along kappa d_k + (1 - kappa) g_k
 * and fold d_k into P. Exhausted directions are skipped with no state change.
 */
void sweep_in_place(SolverState& st, std::span<const LinearizedEq> eqs, const SolveOptions& opts,
                    SweepStats* stats = nullptr,
                    const std::function<void(const StepRecord&)>& on_step = {});

struct SweepResult {
    SolverState state;
    std::vector<StepRecord> steps;
    SweepStats stats;
};

SweepResult sweep(SolverState st, std::span<const LinearizedEq> eqs, const SolveOptions& opts);

/// Linearizes equation k at x.
using EquationBuilder = std::function<LinearizedEq(const Vec& x)>;

struct TraceEntry {
    int outer = 0;
    int k = 0; ///< 0 marks the point an outer iteration starts from
    Vec x;
    double alpha = 0.0;
    double beta = 0.0;
};

struct SolveResult {
    Vec x;
    std::vector<TraceEntry> trace;
    int outer_iterations = 0;
    double residual = 0.0; ///< sum of squared nonlinear residuals at x
    bool converged = false;
    SweepStats stats;      ///< accumulated over all sweeps
};

/// Relinearize at x, sweep, repeat until the residual tolerance or max_outer.
SolveResult solve_system(const Vec& x0, const std::vector<EquationBuilder>& builders,
                         const SolveOptions& opts);

/// Newton-Raphson baseline for square systems; DomainError when K != M or the
/// Jacobian is singular.
SolveResult newton_solve(const Vec& x0, const std::vector<EquationBuilder>& builders,
                         const SolveOptions& opts);

struct AdaptDecision {
    double beta = 1.0;
    bool revert = false;
};

/// Reduce beta (and revert the sweep) when dp > 1 or any df_m >= t.
AdaptDecision adapt_beta(double dp, std::span<const double> df, double t, double beta, double beta_red);

/// CSV: method,outer,k,x1..xM,alpha,beta
void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace, const std::string& method);

} // namespace msct
