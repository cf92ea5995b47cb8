#include "msct/soma.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/LU>

#include "msct/error.hpp"

namespace msct {

SolverState SolverState::start(const Vec& x0, const SolveOptions& opts) {
    SolverState st;
    st.x = x0;
    st.p_mat = Mat::Identity(x0.size(), x0.size());
    st.beta = opts.beta0;
    st.kappa = opts.kappa;
    st.eps = opts.eps;
    return st;
}

SchmidtStep schmidt_step(const Mat& p_mat, const Vec& g, double eps) {
    SchmidtStep out;
    out.d = p_mat * g;
    out.p_next = p_mat - (out.d * out.d.transpose()) / (out.d.squaredNorm() + eps);
    return out;
}

std::optional<double> step_size(const LinearizedEq& eq, const Vec& d, const Vec& x, double tiny) {
    const double denom = eq.gradient().dot(d);
    if (!(std::abs(denom) > tiny)) return std::nullopt;
    return eq.residual(x) / denom;
}

void sweep_in_place(SolverState& st, std::span<const LinearizedEq> eqs, const SolveOptions& opts,
                    SweepStats* stats, const std::function<void(const StepRecord&)>& on_step) {
    const auto m = st.x.size();
    st.p_mat.setIdentity(m, m);
    int k = 0;
    for (const auto& eq : eqs) {
        ++k;
        if (eq.a_row.size() != m) {
            throw DomainError("sweep: equation " + std::to_string(k) + " has the wrong number of unknowns");
        }
        const Vec& g = eq.gradient();
        const Vec d = st.p_mat * g;
        StepRecord rec;
        rec.k = k;
        std::optional<double> alpha;
        Vec dir;
        if (d.norm() > opts.direction_tol * g.norm()) {
            dir = st.kappa * d + (1.0 - st.kappa) * g;
            rec.denominator = g.dot(dir);
            alpha = step_size(eq, dir, st.x, st.eps);
        }
        if (!alpha) {
            rec.skipped = true;
            if (stats) ++stats->skipped;
        } else {
            rec.alpha = *alpha;
            st.x += (st.beta * *alpha) * dir;
            st.p_mat -= (d * d.transpose()) / (d.squaredNorm() + st.eps);
            if (stats) {
                ++stats->steps;
                stats->min_denominator = std::min(stats->min_denominator, std::abs(rec.denominator));
            }
        }
        if (on_step) {
            rec.x = st.x;
            on_step(rec);
        }
    }
    ++st.sweep_count;
}

SweepResult sweep(SolverState st, std::span<const LinearizedEq> eqs, const SolveOptions& opts) {
    SweepResult out;
    sweep_in_place(st, eqs, opts, &out.stats, [&](const StepRecord& r) { out.steps.push_back(r); });
    out.state = std::move(st);
    return out;
}

namespace {

std::vector<LinearizedEq> build_all(const std::vector<EquationBuilder>& builders, const Vec& x) {
    std::vector<LinearizedEq> eqs;
    eqs.reserve(builders.size());
    for (const auto& b : builders) eqs.push_back(b(x));
    return eqs;
}

// At the linearization point b - a.x equals p - G(x).
double nonlinear_residual(const std::vector<LinearizedEq>& eqs, const Vec& x) {
    double r = 0.0;
    for (const auto& eq : eqs) r += eq.residual(x) * eq.residual(x);
    return r;
}

} // namespace

SolveResult solve_system(const Vec& x0, const std::vector<EquationBuilder>& builders,
                         const SolveOptions& opts) {
    if (builders.empty()) throw DomainError("solve_system: no equations");
    SolverState st = SolverState::start(x0, opts);
    SolveResult out;
    auto eqs = build_all(builders, st.x);
    out.residual = nonlinear_residual(eqs, st.x);
    out.trace.push_back({0, 0, st.x, 0.0, st.beta});
    while (out.residual > opts.tol_residual && st.outer_count < opts.max_outer) {
        ++st.outer_count;
        const int outer = st.outer_count;
        sweep_in_place(st, eqs, opts, &out.stats, [&](const StepRecord& r) {
            if (!r.skipped) out.trace.push_back({outer, r.k, r.x, r.alpha, st.beta});
        });
        if (!st.x.allFinite()) throw DivergenceError("solve_system: non-finite iterate");
        eqs = build_all(builders, st.x);
        out.residual = nonlinear_residual(eqs, st.x);
    }
    out.x = st.x;
    out.outer_iterations = st.outer_count;
    out.converged = out.residual <= opts.tol_residual;
    return out;
}

SolveResult newton_solve(const Vec& x0, const std::vector<EquationBuilder>& builders,
                         const SolveOptions& opts) {
    const auto m = x0.size();
    if (static_cast<Eigen::Index>(builders.size()) != m) {
        throw DomainError("newton_solve: needs as many equations as unknowns (K = " +
                          std::to_string(builders.size()) + ", M = " + std::to_string(m) + ")");
    }
    SolveResult out;
    Vec x = x0;
    auto eqs = build_all(builders, x);
    out.residual = nonlinear_residual(eqs, x);
    out.trace.push_back({0, 0, x, 0.0, 1.0});
    int outer = 0;
    while (out.residual > opts.tol_residual && outer < opts.max_outer) {
        ++outer;
        Mat jac(m, m);
        Vec rhs(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            jac.row(k) = eqs[static_cast<std::size_t>(k)].a_row.transpose();
            rhs[k] = eqs[static_cast<std::size_t>(k)].residual(x);
        }
        Eigen::FullPivLU<Mat> lu(jac);
        if (!lu.isInvertible()) throw DomainError("newton_solve: singular Jacobian");
        x += lu.solve(rhs);
        if (!x.allFinite()) throw DivergenceError("newton_solve: non-finite iterate");
        out.trace.push_back({outer, static_cast<int>(m), x, 1.0, 1.0});
        eqs = build_all(builders, x);
        out.residual = nonlinear_residual(eqs, x);
    }
    out.x = x;
    out.outer_iterations = outer;
    out.converged = out.residual <= opts.tol_residual;
    return out;
}

AdaptDecision adapt_beta(double dp, std::span<const double> df, double t, double beta, double beta_red) {
    const bool trigger = dp > 1.0 || std::any_of(df.begin(), df.end(), [t](double v) { return v >= t; });
    if (trigger) return {beta * beta_red, true};
    return {beta, false};
}

void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace, const std::string& method) {
    const auto m = trace.empty() ? 0 : trace.front().x.size();
    os << "method,outer,k";
    for (Eigen::Index i = 0; i < m; ++i) os << ",x" << i + 1;
    os << ",alpha,beta\n";
    const auto old = os.precision(17);
    for (const auto& e : trace) {
        os << method << ',' << e.outer << ',' << e.k;
        for (Eigen::Index i = 0; i < e.x.size(); ++i) os << ',' << e.x[i];
        os << ',' << e.alpha << ',' << e.beta << '\n';
    }
    os.precision(old);
}

} // namespace msct
