#include <cmath>
#include <cstdlib>
#include <numeric>

#include "doctest.h"
#include "levyfluct/montecarlo.hpp"
#include "levyfluct/quad.hpp"

using namespace lf;

namespace {

ModelSpec subdrift() { return ModelSpec::make(ModelKind::SubordinatorMinusDrift, 1, 1); }
ModelSpec bm() { return ModelSpec::make(ModelKind::BrownianMotion, 2, 0); }

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }
double sd(const std::vector<double>& v) {
    double m = mean(v), s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
}

struct EnvThreads {
    explicit EnvThreads(const char* v) { setenv("LEVYFLUCT_THREADS", v, 1); }
    ~EnvThreads() { unsetenv("LEVYFLUCT_THREADS"); }
};

}  // namespace

TEST_CASE("half-stable draws: cdf at 1 and Laplace transform") {
    const int n = 1000000;
    PathRng r = path_rng(7, 0);
    std::vector<double> e(n);
    int below = 0;
    for (int i = 0; i < n; ++i) {
        double T = sample_positive_stable(0.5, r);
        REQUIRE(T > 0);
        below += T <= 1;
        e[i] = std::exp(-T);
    }
    // density (2 pi)^(-1/2) s^(-3/2) exp(-1/(2s)): P(T <= 1) = 2 P(Z > 1)
    double p = below / double(n), want = 2 * norm_sf(1);
    CHECK(std::abs(p - want) <= 3 * std::sqrt(want * (1 - want) / n));
    CHECK(std::abs(mean(e) - std::exp(-std::sqrt(2.0))) <= 3 * sd(e) / std::sqrt(double(n)));
}

TEST_CASE("Kanter draws for beta = 0.7 match the Laplace transform") {
    const int n = 400000;
    const double beta = 0.7;
    PathRng r = path_rng(8, 0);
    std::vector<double> e(n);
    for (int i = 0; i < n; ++i) e[i] = std::exp(-sample_positive_stable(beta, r));
    // Laplace exponent of the Levy measure (2 pi)^(-1/2) s^(-1-beta): Gamma(1-beta)/(beta sqrt(2 pi)) lam^beta
    double want = std::exp(-std::tgamma(1 - beta) / (beta * std::sqrt(2 * M_PI)));
    CHECK(std::abs(mean(e) - want) <= 3 * sd(e) / std::sqrt(double(n)));
}

TEST_CASE("gaussian histogram within 3 stderr on at least 95 of 100 bins") {
    const std::size_t n = 1000000;
    std::vector<double> z = simulate_terminal(bm(), 1.0, n, 3);
    std::vector<double> edges;
    for (int i = 0; i <= 100; ++i) edges.push_back(-4 + 0.08 * i);
    MCEstimate e = estimate_density(z, edges);
    int ok = 0;
    for (std::size_t b = 0; b < 100; ++b) {
        double want = (norm_cdf(edges[b + 1]) - norm_cdf(edges[b])) / 0.08;
        ok += std::abs(e.density[b] - want) <= 3 * e.stderr_[b];
    }
    CHECK(ok >= 95);
}

TEST_CASE("estimate_density edge cases") {
    std::vector<double> s(2000);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = i / 2000.0;
    MCEstimate e = estimate_density(s, {-1, 3});
    CHECK(e.density[0] == doctest::Approx(0.25));
    CHECK_THROWS_AS(estimate_density({}, {0, 1}), ConfigError);
    CHECK_THROWS_AS(estimate_density(s, {}), ConfigError);
    CHECK_THROWS_AS(estimate_density(std::vector<double>(10, 0.5), {0, 1}), ConfigError);
}

TEST_CASE("skeleton max dominates the terminal value") {
    for (auto m : {bm(), subdrift(), ModelSpec::make(ModelKind::SymmetricStable, 1, 0),
                   ModelSpec::make(ModelKind::SubordinatedDriftBM, 1, 1)}) {
        PathSamples s = simulate_terminal_and_max(m, 0.5, 64, 20000, 9);
        for (std::size_t i = 0; i < s.terminal.size(); ++i) {
            REQUIRE(s.maximum[i] >= s.terminal[i]);
            REQUIRE(s.maximum[i] >= 0);
        }
    }
    CHECK_THROWS_AS(simulate_terminal_and_max(bm(), 0.5, 8, 100, 1), ConfigError);
}

TEST_CASE("bit-exact across worker counts") {
    PathSamples a, b, c;
    {
        EnvThreads e("1");
        a = simulate_terminal_and_max(subdrift(), 0.3, 32, 20000, 5);
    }
    {
        EnvThreads e("3");
        b = simulate_terminal_and_max(subdrift(), 0.3, 32, 20000, 5);
    }
    {
        EnvThreads e("8");
        c = simulate_terminal_and_max(subdrift(), 0.3, 32, 20000, 5);
    }
    CHECK(a.terminal == b.terminal);
    CHECK(a.maximum == b.maximum);
    CHECK(a.terminal == c.terminal);
    CHECK(a.maximum == c.maximum);
    PathSamples d = simulate_terminal_and_max(subdrift(), 0.3, 32, 20000, 6);
    CHECK(a.terminal != d.terminal);
}

TEST_CASE("path streams depend on the path index only") {
    auto s = simulate_terminal_and_max(bm(), 1, 16, 10000, 4);
    auto l = simulate_terminal_and_max(bm(), 1, 16, 3, 4);
    for (int i = 0; i < 3; ++i) CHECK(l.terminal[i] == s.terminal[i]);
}

TEST_CASE("mean skeleton max is nondecreasing in n_steps") {
    double prev = 0, prev_se = 0;
    std::uint64_t seed = 100;
    for (int n : {16, 64, 256}) {
        PathSamples s = simulate_terminal_and_max(bm(), 1, n, 40000, seed++);
        double m = mean(s.maximum), se = sd(s.maximum) / std::sqrt(double(s.maximum.size()));
        if (n > 16) CHECK(m >= prev - 2 * std::hypot(se, prev_se));
        prev = m;
        prev_se = se;
    }
    // E max of the skeleton is below sqrt(2/pi) by about 0.5826 sqrt(dt)
    PathSamples s = simulate_terminal_and_max(bm(), 1, 256, 200000, 1);
    double se = sd(s.maximum) / std::sqrt(2e5);
    CHECK(std::abs(mean(s.maximum) - (std::sqrt(2 / M_PI) - kSkeletonShift / 16)) <= 3 * se + 2e-3);
}

TEST_CASE("skeleton zero fraction brackets the ballot-theorem value") {
    // for a driftless subordinator minus drift a: P(sup_{s<=t} X_s = 0 | X_t) = (-X_t)^+ / (a t)
    Model model(subdrift());
    auto z = skeleton_zero_fraction(subdrift(), {0.05, 0.1, 0.2}, 256, 200000, 11);
    for (std::size_t k = 0; k < 3; ++k) {
        double t = z.t[k];
        double exact = 0;
        Nodes nd = graded_nodes(-t, 0, true, 30);
        for (std::size_t q = 0; q < nd.x.size(); ++q) exact += nd.w[q] * (-nd.x[q]) / t * model.p(t, nd.x[q]);
        double se = 3 * z.fine[k].stderr_;
        CHECK(z.fine[k].value >= exact - se);
        CHECK(z.fine[k].value - z.allowance[k] <= exact + se);
        CHECK(z.coarse[k].value >= z.fine[k].value - 3 * std::hypot(z.fine[k].stderr_, z.coarse[k].stderr_));
    }
}

TEST_CASE("ladder drift estimate") {
    DStarEstimate b = estimate_ladder_time_drift(bm(), 5, 1000, 1000, 1);
    CHECK(b.regular_up);
    CHECK(b.value == 0);
    DStarReport r = estimate_dstar_with_checks(subdrift(), 5, 5000, 50000, 42);
    CHECK(r.d_star > 0);
    CHECK(r.d_star < 1);
    CHECK(r.seed_stable);
    // skeleton passage is late, so the estimate sits above 2 - sqrt(3) by O(sqrt(dt))
    CHECK(r.d_star >= 2 - std::sqrt(3.0) - 3 * r.d_star_stderr);
    CHECK(r.d_star <= 2 - std::sqrt(3.0) + 0.03);
}
