#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "levyfluct/entrance_law.hpp"

using namespace lf;

namespace {

Model bm() { return Model(ModelSpec::make(ModelKind::BrownianMotion, 2, 0, 0.0)); }
Model cauchy() { return Model(ModelSpec::make(ModelKind::SymmetricStable, 1, 0, 0.0)); }

// d* = exp(-int e^{-t} P(X_t > 0) dt / t) for the drifted subordinator, by quadrature on t = v^2
double spitzer_dstar(const Model& m) {
    boost::math::quadrature::tanh_sinh<double> ts;
    double I = ts.integrate([&](double v) { return v * v > 0 ? 2 * std::exp(-v * v) * m.sf(v * v, 0) / v : 0.0; }, 0.0,
                            std::numeric_limits<double>::infinity());
    return std::exp(-I);
}

struct Run {
    QStarSolution sol;
    ExcursionFunctions ex;
};

Run run(const Model& m, int n, double X, int M) {
    SolverOptions o;
    o.space_intervals = M;
    auto tg = build_time_grid(1, n, 2);
    auto xg = build_space_grid(0.05, X, 100, SpaceMode::Linear);
    Run r;
    r.sol = solve_qstar(m, tg, xg, o);
    r.ex = excursion_mass(r.sol, o);
    solve_dual_tail(r.ex, o);
    return r;
}

const Run& bm_run() {
    static Run r = run(bm(), 60, 4, 400);
    return r;
}

}  // namespace

TEST_CASE("brownian entrance law matches the closed form") {
    const auto& r = bm_run();
    const auto& q = r.sol.q;
    double worst = 0;
    for (std::size_t k = 0; k < q.tg.size(); ++k) {
        double t = q.tg.t[k];
        if (t < 0.05) continue;
        double peak = std::exp(-0.5) / (std::sqrt(M_PI) * t);
        for (std::size_t j = 0; j < q.xg.size(); ++j) {
            double x = q.xg.x[j];
            if (x < 0.2 || x > 3) continue;
            double ref = x / (std::sqrt(M_PI) * std::pow(t, 1.5)) * std::exp(-x * x / (2 * t));
            double v = q.at(k, j);
            worst = std::max(worst, std::abs(v - ref) / std::max({ref, v, 1e-3 * peak}));
        }
    }
    CHECK(worst < 0.02);
    CHECK(r.sol.residuals.residual_defining < 0.02);
    CHECK(r.sol.residuals.residual_cross < 0.03);
}

TEST_CASE("brownian excursion functions") {
    const auto& ex = bm_run().ex;
    for (std::size_t k = 0; k < ex.t.size(); ++k) {
        double t = ex.t[k];
        CHECK(ex.m_star[k] * std::sqrt(M_PI * t) == doctest::Approx(1).epsilon(0.02));
        CHECK(ex.m[k] == doctest::Approx(ex.m_star[k]).epsilon(1e-3));
    }
    CHECK(ex.N_star.back() == doctest::Approx(2 / std::sqrt(M_PI)).epsilon(0.01));
    CHECK(ex.theta == doctest::Approx(0.5).epsilon(0.01));
    CHECK(renewal_residual(ex) < 0.01);
    CHECK(scalar_mass_equation_check(bm(), ex) < 0.02);
}

TEST_CASE("zero field gives unit residual") {
    QStarSolution s = bm_run().sol;
    for (auto& row : s.in.Q) std::fill(row.begin(), row.end(), 0.0);
    std::fill(s.in.S.begin(), s.in.S.end(), 0.0);
    SolverOptions o;
    auto rep = compute_residuals(bm(), s, o);
    CHECK(rep.residual_defining == doctest::Approx(1.0));
    CHECK(rep.residual_cross == doctest::Approx(1.0));
}

TEST_CASE("cauchy residuals and dual symmetry") {
    auto r = run(cauchy(), 20, 4, 160);
    CHECK(r.sol.residuals.residual_defining < 0.02);
    CHECK(r.sol.residuals.residual_cross < 0.03);
    CHECK(renewal_residual(r.ex) < 0.01);
    CHECK(scalar_mass_equation_check(cauchy(), r.ex) < 0.02);
    for (std::size_t k = 0; k < r.ex.t.size(); ++k) CHECK(r.ex.m[k] == doctest::Approx(r.ex.m_star[k]).epsilon(1e-3));
    // positivity 1/2 gives m* = c t^{-1/2}
    CHECK(r.ex.theta == doctest::Approx(0.5).epsilon(0.01));
    for (std::size_t k = 0; k < r.sol.q.tg.size(); ++k)
        for (std::size_t j = 0; j < r.sol.q.xg.size(); ++j) CHECK(r.sol.q.at(k, j) >= 0);
}

TEST_CASE("scalar mass profile normalization") {
    Model sd(ModelSpec::make(ModelKind::SubordinatorMinusDrift, 1, 1));
    double ds = spitzer_dstar(sd);
    CHECK(ds == doctest::Approx(2 - std::sqrt(3.0)).epsilon(1e-8));
    auto m = solve_scalar_mass(sd, ds);
    CHECK(ds + laplace_at_one(m) == doctest::Approx(1).epsilon(2e-3));
    // dual of an irregular-upward process: d = 0 and n(t) d* + int n m = 1 means n(0+) = 1/d*
    auto n = solve_dual_profile(m, ds);
    CHECK(n(1e-9) == doctest::Approx(1 / ds).epsilon(1e-2));
    // m* decreasing, n decreasing
    for (double t = 1e-3; t < 10; t *= 2) {
        CHECK(m(2 * t) < m(t));
        CHECK(n(2 * t) <= n(t) * (1 + 1e-12));
    }
}

TEST_CASE("power samples integrate exactly on power laws") {
    std::vector<double> t, y;
    for (int k = 1; k <= 20; ++k) {
        t.push_back(std::pow(k / 20.0, 2));
        y.push_back(std::pow(t.back(), -0.3));
    }
    PowerSamples ps(t, y);
    CHECK(ps.theta == doctest::Approx(0.3));
    auto c = ps.cumulative();
    for (std::size_t k = 0; k < t.size(); ++k) CHECK(c[k] == doctest::Approx(std::pow(t[k], 0.7) / 0.7).epsilon(1e-10));
}

TEST_CASE("sub-drift requires d*") {
    Model sd(ModelSpec::make(ModelKind::SubordinatorMinusDrift, 1, 1));
    auto tg = build_time_grid(1, 10, 2);
    auto xg = build_space_grid(0.05, 2, 20, SpaceMode::Linear);
    CHECK_THROWS_AS(solve_qstar(sd, tg, xg), PrerequisiteError);
}
