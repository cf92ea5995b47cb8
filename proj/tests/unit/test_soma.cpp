#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "msct/error.hpp"
#include "msct/soma.hpp"
#include "oracles.hpp"

using namespace msct;

namespace {

Vec vec(std::initializer_list<double> v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

LinearizedEq plane(const Vec& a, double b) {
    LinearizedEq eq;
    eq.a_row = a;
    eq.b = b;
    eq.p_meas = b;
    return eq;
}

std::vector<LinearizedEq> linear_system(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    std::vector<LinearizedEq> eqs;
    for (Eigen::Index k = 0; k < a.rows(); ++k) eqs.push_back(plane(Vec(a.row(k).transpose()), b[k]));
    return eqs;
}

std::vector<EquationBuilder> constant_builders(const std::vector<LinearizedEq>& eqs) {
    std::vector<EquationBuilder> out;
    for (const auto& eq : eqs) out.push_back([eq](const Vec&) { return eq; });
    return out;
}

SolveOptions exact_options() {
    SolveOptions o;
    o.beta0 = 1.0;
    o.kappa = 1.0;
    o.eps = 0.0;
    return o;
}

std::vector<EquationBuilder> toy_builders() {
    const oracle::ToySystem toy;
    const auto t = builtin::toy_table();
    std::vector<EquationBuilder> out;
    for (int k = 0; k < 2; ++k) {
        const PolyModel model(builtin::toy_spectrum(k), t);
        const double p = toy.project(k, 1.0, 4.0);
        out.push_back([model, p](const Vec& x) { return model.linearize(x, p); });
    }
    return out;
}

} // namespace

TEST_CASE("schmidt_step: axis case and second direction") {
    const Mat eye = Mat::Identity(2, 2);
    const auto first = schmidt_step(eye, vec({1, 0}), 0.0);
    CHECK(first.d == vec({1, 0}));
    CHECK(first.p_next(0, 0) == 0.0);
    CHECK(first.p_next(0, 1) == 0.0);
    CHECK(first.p_next(1, 1) == 1.0);

    const auto guarded = schmidt_step(schmidt_step(eye, vec({1, 0}), 1e-8).p_next, vec({1, 1}), 1e-8);
    CHECK(std::abs(guarded.d[0]) < 1e-7);
    CHECK(std::abs(guarded.d[1] - 1.0) < 1e-7);
}

TEST_CASE("schmidt_step: orthogonal gradients pass through unchanged") {
    const Mat eye = Mat::Identity(3, 3);
    const Vec g1 = vec({1, 2, 0});
    const Vec g2 = vec({-2, 1, 5});
    const auto s1 = schmidt_step(eye, g1, 1e-8);
    const auto s2 = schmidt_step(s1.p_next, g2, 1e-8);
    CHECK((s2.d - g2).norm() < 1e-7);
}

TEST_CASE("recursion matches classical Gram-Schmidt and keeps P a projector") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> z;
    for (int m = 2; m <= 5; ++m) {
        for (int k_count = 1; k_count <= m; ++k_count) {
            std::vector<Eigen::VectorXd> g;
            for (int k = 0; k < k_count; ++k) {
                Eigen::VectorXd v(m);
                for (auto& c : v) c = z(rng);
                g.push_back(v);
            }
            const auto ref = oracle::gram_schmidt(g);
            Mat p = Mat::Identity(m, m);
            std::vector<Vec> d;
            Eigen::MatrixXd gs(m, k_count);
            Eigen::MatrixXd ds(m, k_count);
            for (int k = 0; k < k_count; ++k) {
                const auto s = schmidt_step(p, Vec(g[static_cast<std::size_t>(k)]), 0.0);
                CHECK((s.d - Vec(ref[static_cast<std::size_t>(k)])).norm() <= 1e-9 * ref[static_cast<std::size_t>(k)].norm());
                p = s.p_next;
                d.push_back(s.d);
                CHECK((p - p.transpose()).norm() < 1e-12);
                CHECK((p * p - p).norm() < 1e-8);
                gs.col(k) = g[static_cast<std::size_t>(k)];
                ds.col(k) = s.d;
            }
            for (std::size_t i = 0; i < d.size(); ++i)
                for (std::size_t j = i + 1; j < d.size(); ++j)
                    CHECK(std::abs(d[i].dot(d[j])) <= 1e-8 * d[i].norm() * d[j].norm());
            Eigen::MatrixXd both(m, 2 * k_count);
            both << gs, ds;
            Eigen::FullPivLU<Eigen::MatrixXd> lu_g(gs);
            Eigen::FullPivLU<Eigen::MatrixXd> lu_both(both);
            lu_g.setThreshold(1e-10);
            lu_both.setThreshold(1e-10);
            CHECK(lu_g.rank() == lu_both.rank());
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(p)};
            CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
            CHECK(eig.eigenvalues().maxCoeff() <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("step_size examples") {
    CHECK(*step_size(plane(vec({1, 0}), 2.0), vec({1, 0}), vec({0, 0})) == 2.0);
    CHECK(*step_size(plane(vec({1, 1}), 3.0), vec({0.3, 0.7}), vec({1, 2})) == 0.0);
    CHECK_FALSE(step_size(plane(vec({1, 0}), 2.0), vec({0, 1}), vec({0, 0})).has_value());
    CHECK_FALSE(step_size(plane(vec({1, 0}), 2.0), vec({1e-9, 1}), vec({0, 0}), 1e-6).has_value());
    const auto eq = plane(vec({2, -1}), 4.0);
    const Vec x = vec({0.5, 0.25});
    const Vec d = vec({0.3, 1.1});
    const double a = *step_size(eq, d, x);
    CHECK(eq.a_row.dot(x + a * d) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("2x2 sweep: unit steps reach (1, 3)") {
    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 1, 3;
    const auto eqs = linear_system(a, Eigen::Vector2d(5, 10));
    const auto opts = exact_options();
    const auto r = sweep(SolverState::start(vec({0, 0}), opts), eqs, opts);
    REQUIRE(r.steps.size() == 2);
    CHECK(r.steps[0].alpha == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.steps[1].alpha == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.state.x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.state.x[1] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(r.state.sweep_count == 1);
    CHECK(r.stats.steps == 2);
}

TEST_CASE("one sweep solves well-conditioned square linear systems") {
    std::mt19937_64 rng(101);
    std::normal_distribution<double> z;
    const auto opts = exact_options();
    for (int m = 1; m <= 6; ++m) {
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::MatrixXd a = oracle::random_conditioned(m, 100.0, rng);
            Eigen::VectorXd truth(m);
            for (auto& v : truth) v = z(rng);
            const Eigen::VectorXd b = a * truth;
            const auto eqs = linear_system(a, b);
            const auto r = sweep(SolverState::start(Vec::Zero(m), opts), eqs, opts);
            const Eigen::VectorXd x = r.state.x;
            CHECK((x - truth).norm() <= 1e-10 * truth.norm());
            // each step keeps the earlier hyperplanes satisfied
            for (std::size_t k = 0; k < r.steps.size(); ++k) {
                for (std::size_t j = 0; j <= k; ++j) {
                    const double lhs = eqs[j].a_row.dot(r.steps[k].x);
                    CHECK(std::abs(lhs - eqs[j].b) <= 1e-9 * (std::abs(eqs[j].b) + eqs[j].a_row.norm() * r.steps[k].x.norm()));
                }
            }
        }
    }
}

TEST_CASE("beta = 0 freezes the iterate") {
    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 1, 3;
    auto opts = exact_options();
    opts.beta0 = 0.0;
    const auto r = sweep(SolverState::start(vec({0.5, -1}), opts), linear_system(a, Eigen::Vector2d(5, 10)), opts);
    CHECK(r.state.x == vec({0.5, -1}));
}

TEST_CASE("kappa = 0 steps along raw gradients like relaxed Kaczmarz") {
    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 1, 3;
    const auto eqs = linear_system(a, Eigen::Vector2d(5, 10));
    auto opts = exact_options();
    opts.kappa = 0.0;
    opts.beta0 = 0.7;
    const auto r = sweep(SolverState::start(vec({0, 0}), opts), eqs, opts);
    Eigen::Vector2d x(0, 0);
    for (int k = 0; k < 2; ++k) {
        const Eigen::Vector2d g = a.row(k).transpose();
        x += 0.7 * (eqs[static_cast<std::size_t>(k)].b - g.dot(x)) / g.squaredNorm() * g;
        CHECK((Eigen::Vector2d(r.steps[static_cast<std::size_t>(k)].x) - x).norm() < 1e-14);
    }
}

TEST_CASE("dependent equations are skipped without state change") {
    auto opts = exact_options();
    std::vector<LinearizedEq> eqs{plane(vec({1, 1}), 2.0), plane(vec({2, 2}), 4.0), plane(vec({1, -1}), 0.0)};
    const auto r = sweep(SolverState::start(vec({0, 0}), opts), eqs, opts);
    REQUIRE(r.steps.size() == 3);
    CHECK(r.steps[1].skipped);
    CHECK(r.steps[1].x == r.steps[0].x);
    CHECK(r.stats.skipped == 1);
    CHECK(r.state.x[0] == doctest::Approx(1.0));
    CHECK(r.state.x[1] == doctest::Approx(1.0));

    eqs[0].a_row = vec({1, 1, 1});
    CHECK_THROWS_AS(sweep(SolverState::start(vec({0, 0}), opts), eqs, opts), DomainError);
}

TEST_CASE("toy system: SOMA converges to (1, 4) with a decreasing residual") {
    auto opts = exact_options();
    opts.eps = 1e-8;
    opts.max_outer = 50;
    const auto r = solve_system(vec({0, 0}), toy_builders(), opts);
    CHECK(r.converged);
    CHECK(r.outer_iterations <= 5);
    CHECK(std::abs(r.x[0] - 1.0) < 1e-6);
    CHECK(std::abs(r.x[1] - 4.0) < 1e-6);
    CHECK(r.trace.front().k == 0);
    CHECK(r.trace.size() == static_cast<std::size_t>(1 + 2 * r.outer_iterations));

    const oracle::ToySystem toy;
    const double p1 = toy.project(0, 1, 4), p2 = toy.project(1, 1, 4);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& e : r.trace) {
        if (e.k != 2 && e.outer != 0) continue;
        const double res = std::hypot(toy.project(0, e.x[0], e.x[1]) - p1, toy.project(1, e.x[0], e.x[1]) - p2);
        if (prev > 1e-9) CHECK(res < prev);
        prev = res;
    }
}

TEST_CASE("solve_system trivial cases") {
    auto opts = exact_options();
    const auto at_truth = solve_system(vec({1, 4}), toy_builders(), opts);
    CHECK(at_truth.outer_iterations == 0);
    CHECK(at_truth.trace.size() == 1);

    const auto one = solve_system(vec({0}), constant_builders({plane(vec({4}), 2.0)}), opts);
    CHECK(one.outer_iterations == 1);
    CHECK(one.x[0] == 0.5);

    CHECK_THROWS_AS(solve_system(vec({0}), {}, opts), DomainError);
}

TEST_CASE("Newton baseline") {
    auto opts = exact_options();
    const auto r = newton_solve(vec({0, 0}), toy_builders(), opts);
    CHECK(std::abs(r.x[0] - 1.0) < 1e-8);
    CHECK(std::abs(r.x[1] - 4.0) < 1e-8);

    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 1, 3;
    const auto lin = newton_solve(vec({0, 0}), constant_builders(linear_system(a, Eigen::Vector2d(5, 10))), opts);
    CHECK(lin.outer_iterations == 1);
    CHECK(lin.x[0] == doctest::Approx(1.0));
    CHECK(lin.x[1] == doctest::Approx(3.0));

    CHECK_THROWS_AS(newton_solve(vec({0, 0, 0}), toy_builders(), opts), DomainError);
    a << 1, 1, 2, 2;
    CHECK_THROWS_AS(newton_solve(vec({0, 0}), constant_builders(linear_system(a, Eigen::Vector2d(1, 1))), opts),
                    DomainError);
}

TEST_CASE("adapt_beta examples") {
    const double quiet[2] = {0.2, 0.3};
    auto d = adapt_beta(0.5, quiet, 1.5, 0.8, 0.9);
    CHECK(d.beta == 0.8);
    CHECK_FALSE(d.revert);
    d = adapt_beta(1.2, quiet, 1.5, 0.8, 0.9);
    CHECK(d.beta == doctest::Approx(0.72));
    CHECK(d.revert);
    const double edge[2] = {1.5, 0.1};
    d = adapt_beta(0.5, edge, 1.5, 1.0, 0.9);
    CHECK(d.beta == doctest::Approx(0.9));
    CHECK(d.revert);
    d = adapt_beta(1.0, quiet, 1.5, 1.0, 0.9);
    CHECK_FALSE(d.revert);
}

TEST_CASE("trace CSV layout") {
    auto opts = exact_options();
    const auto r = solve_system(vec({0, 0}), toy_builders(), opts);
    std::ostringstream os;
    write_trace_csv(os, r.trace, "soma");
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "method,outer,k,x1,x2,alpha,beta");
    std::getline(in, line);
    CHECK(line.rfind("soma,0,0,0,0,", 0) == 0);
    std::size_t rows = 1;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == r.trace.size());
}
