#include <cmath>

#include "doctest.h"
#include "levyfluct/models.hpp"
#include "levyfluct/quad.hpp"
#include "levyfluct/specfun.hpp"

using namespace lf;

namespace {

Model bm() { return Model(ModelSpec::make(ModelKind::BrownianMotion, 2, 0, 0.0)); }
Model cauchy() { return Model(ModelSpec::make(ModelKind::SymmetricStable, 1, 0, 0.0)); }
Model subbm(double alpha = 1) { return Model(ModelSpec::make(ModelKind::SubordinatedDriftBM, alpha, 1, 0.0)); }
Model subdrift(double alpha = 1) { return Model(ModelSpec::make(ModelKind::SubordinatorMinusDrift, alpha, 1, 0.3)); }

// plain composite Gauss over [lo, hi] split into n panels
template <class F>
double panel_gauss(F f, double lo, double hi, int n) {
    const auto& g = gauss16();
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        double a = lo + (hi - lo) * i / n, b = lo + (hi - lo) * (i + 1) / n;
        for (std::size_t q = 0; q < g.x.size(); ++q) acc += 0.5 * (b - a) * g.w[q] * f(0.5 * (a + b) + 0.5 * (b - a) * g.x[q]);
    }
    return acc;
}

// total mass over the real line on x = sinh(y) s
double total_mass(const Model& m, double t) {
    double s = std::max(t, 1e-3);
    return panel_gauss([&](double y) { return m.p(t, s * std::sinh(y)) * s * std::cosh(y); }, -40, 40, 400);
}

}  // namespace

TEST_CASE("transition densities at reference points") {
    CHECK(bm().p(1, 0) == doctest::Approx(0.3989423).epsilon(1e-7));
    CHECK(subdrift().p(0.01, 1) == doctest::Approx(3.930e-3).epsilon(1e-3));
    double r = std::sqrt(4.25);
    CHECK(subbm().p(0.5, 2) == doctest::Approx(0.5 * std::exp(2.0) / M_PI * bessel_k(1, r) / r).epsilon(1e-13));
    CHECK(subdrift().p(0.5, -0.6) == 0.0);
}

TEST_CASE("closed forms match subordination quadrature") {
    auto sb = subbm();
    auto sd = subdrift();
    for (double t : {0.05, 0.5, 1.0})
        for (double x : {-1.0, 0.0, 0.3, 2.0}) {
            double q = subordinate(0.5, t, [&](double v) { return std::exp(-(x - v) * (x - v) / (2 * v)) / std::sqrt(2 * M_PI * v); });
            CHECK(sb.p(t, x) == doctest::Approx(q).epsilon(1e-9));
        }
    // general-alpha path at alpha = 1 reproduces the Bessel form
    ModelSpec s = ModelSpec::make(ModelKind::SubordinatedDriftBM, 1.0 - 1e-12, 1, 0.0);
    CHECK(Model(s).p(0.3, 0.7) == doctest::Approx(sb.p(0.3, 0.7)).epsilon(1e-6));
    ModelSpec d = ModelSpec::make(ModelKind::SubordinatorMinusDrift, 1.0 - 1e-12, 1, 0.3);
    CHECK(Model(d).p(0.3, 0.7) == doctest::Approx(sd.p(0.3, 0.7)).epsilon(1e-6));
}

TEST_CASE("Levy densities") {
    CHECK(subdrift().levy_density(1) == doctest::Approx(0.3989423).epsilon(1e-7));
    CHECK(subdrift().levy_density(4) == doctest::Approx(0.0498678).epsilon(1e-6));
    CHECK(subbm().levy_density(2) == doctest::Approx(std::exp(2.0) * bessel_k(1, 2) / (2 * M_PI)).epsilon(1e-13));
    CHECK(subbm().levy_density(2) == doctest::Approx(0.16448).epsilon(1e-4));
    CHECK(cauchy().levy_density(1) == doctest::Approx(1 / M_PI).epsilon(1e-14));
    CHECK_THROWS(cauchy().levy_density(0));
    CHECK_THROWS(bm().levy_density(1));
    // the general Bessel-order formula at alpha=1 against the K1 special case
    auto g = subbm(1.0 + 1e-9);
    for (double x : {-3.0, -0.5, 0.2, 1.0, 6.0}) {
        double ax = std::abs(x);
        CHECK(g.levy_density(x) == doctest::Approx(std::exp(x) * bessel_k(1, ax) / (M_PI * ax)).epsilon(1e-7));
    }
}

TEST_CASE("positivity") {
    CHECK(bm().positivity(3) == 0.5);
    CHECK(cauchy().positivity(0.1) == 0.5);
    double p = subdrift().positivity(0.01);
    CHECK(p > 0);
    CHECK(p < 1);
    // closed form erf(sqrt(t/(2a))) against quadrature of p over x > 0
    double q = panel_gauss([&](double y) { double x = std::exp(y); return subdrift().p(0.01, x) * x; }, -20, 80, 500);
    CHECK(p == doctest::Approx(q).epsilon(1e-8));
    CHECK(p == doctest::Approx(std::erf(std::sqrt(0.005))).epsilon(1e-12));
    auto sb = subbm();
    for (double t : {0.01, 0.3, 2.0}) {
        double e = subordinate(0.5, t, [](double v) { return 0.5 * std::erfc(-std::sqrt(v) / M_SQRT2); });
        CHECK(sb.positivity(t) == doctest::Approx(e).epsilon(1e-9));
    }
    CHECK(sb.positivity(0.001) == doctest::Approx(0.5).epsilon(2e-3));
}

TEST_CASE("renewal function ratios") {
    CHECK(bm().h_star(2) / bm().h_star(1) == doctest::Approx(2));
    CHECK(cauchy().h_star(4) / cauchy().h_star(1) == doctest::Approx(2));
    double prev = 0;
    for (double x = 0.01; x < 100; x *= 1.7) {
        CHECK(cauchy().h_star(x) >= prev);
        prev = cauchy().h_star(x);
    }
    CHECK_THROWS(subbm().h_star(1));
}

TEST_CASE("regularity profiles") {
    auto r = regularity_profile(bm().spec());
    CHECK(r.regular_up);
    CHECK(r.regular_down);
    CHECK(r.d == 0);
    CHECK(*r.d_star == 0);
    auto s = regularity_profile(ModelSpec::make(ModelKind::SubordinatorMinusDrift, 1, 1));
    CHECK(!s.regular_up);
    CHECK(s.regular_down);
    CHECK(!s.d_star.has_value());
    auto caps = bm().capabilities();
    CHECK((caps.has_closed_p && caps.has_closed_qstar && caps.has_h_star && caps.supports_negative_x));
    CHECK(!subdrift().capabilities().supports_negative_x);
}

TEST_CASE("partial moments and survival against quadrature") {
    for (const Model& m : {bm(), cauchy(), subbm(), subdrift()}) {
        for (double s : {1e-4, 0.02, 0.5, 1.0}) {
            for (auto [lo, hi] : {std::pair{0.0, 0.01}, {0.0, 0.5}, {0.3, 0.31}, {1.0, 2.0}, {3.96, 4.0}}) {
                auto mo = m.partial_moments(s, lo, hi);
                INFO(std::string(kind_name(m.spec().kind)), " s=", s, " [", lo, ",", hi, "]");
                // grade toward zero where the density concentrates
                Nodes nd = graded_nodes(lo, hi, true, 40, gauss8());
                double q0 = 0, q1 = 0, q2 = 0;
                for (std::size_t i = 0; i < nd.x.size(); ++i) {
                    double w = nd.x[i], f = nd.w[i] * m.p(s, w);
                    q0 += f;
                    q1 += f * w;
                    q2 += f * w * w;
                }
                double sc = std::max(q0, 1e-300);
                CHECK(std::abs(mo.m0 - q0) <= 1e-8 * sc + 1e-15);
                CHECK(std::abs(mo.m1 - q1) <= 1e-8 * std::max(q1, 1e-300) + 1e-15);
                CHECK(std::abs(mo.m2 - q2) <= 1e-8 * std::max(q2, 1e-300) + 1e-15);
            }
            for (double y : {0.0, 0.2, 4.0}) {
                double q = panel_gauss([&](double u) { double x = y + std::exp(u); return m.p(s, x) * std::exp(u); }, -40, 100, 1400);
                double sf = m.sf(s, y);
                CHECK(sf == doctest::Approx(q).epsilon(1e-7));
            }
        }
    }
}

TEST_CASE("total mass is one") {
    for (const Model& m : {bm(), cauchy(), subbm()})
        for (double t : {0.01, 0.1, 1.0}) CHECK(total_mass(m, t) == doctest::Approx(1).epsilon(1e-4));
    // sub_drift lives on x > -a t
    auto sd = subdrift();
    for (double t : {0.01, 0.1, 1.0}) {
        double q = panel_gauss([&](double y) { double u = std::exp(y); return sd.p(t, u - t) * u; }, -40, 40, 800);
        CHECK(q == doctest::Approx(1).epsilon(1e-4));
    }
}

TEST_CASE("small-time ratio sup-profile decreases") {
    for (const Model& m : {cauchy(), subbm(), subdrift()}) {
        double prev = INFINITY;
        for (double t : {0.1, 0.03, 0.01, 0.003}) {
            double sup = 0;
            for (double x = 1; x <= 10; x += 0.25) sup = std::max(sup, std::abs(m.p(t, x) / (t * m.levy_density(x)) - 1));
            CHECK(sup < prev);
            prev = sup;
        }
    }
}

TEST_CASE("Levy density regularity on the right tail") {
    for (const Model& m : {cauchy(), subbm(), subdrift()}) {
        double c1 = 0, c2 = 0;
        for (double x = 1; x < 200; x *= 1.1) {
            for (double y = x; y < 400; y *= 1.3) c1 = std::max(c1, m.levy_density(y) / m.levy_density(x));
            c2 = std::max(c2, m.levy_density(x) / m.levy_density(2 * x));
        }
        CHECK(c1 <= 1.0 + 1e-12);
        CHECK(c2 < 10);
    }
}

TEST_CASE("model config parsing") {
    auto s = parse_model({{"model", "sym_stable"}, {"alpha", "1"}});
    CHECK(s.kind == ModelKind::SymmetricStable);
    CHECK_THROWS_AS(parse_model({{"model", "sym_stable"}}), ConfigError);
    CHECK_THROWS_AS(parse_model({{"model", "levy"}}), ConfigError);
    CHECK_THROWS_AS(parse_model({{"model", "sub_bm"}, {"a", "x1"}}), ConfigError);
    auto d = parse_model({{"model", "sub_drift"}, {"a", "1"}});
    CHECK(!d.d_star.has_value());
}
