#include "levyfluct/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "json.hpp"
#include "levyfluct/parallel.hpp"
#include "levyfluct/specfun.hpp"

namespace lf {

namespace {

constexpr std::size_t kBlock = 4096;

double normal(PathRng& r) { return boost::random::normal_distribution<double>()(r); }

// uniform on (0,1), never 0
double uniform_open(PathRng& r) {
    for (;;) {
        double u = boost::random::uniform_01<double>()(r);
        if (u > 0) return u;
    }
}

// E exp(-lam T) = exp(-lam^beta), Kanter's representation
double stable_std(double beta, PathRng& r) {
    if (beta == 0.5) {
        // 1/(2 Z^2)
        double z = normal(r);
        return 0.5 / (z * z);
    }
    double u = M_PI * uniform_open(r);
    double e = boost::random::exponential_distribution<double>()(r);
    double a = std::pow(std::pow(std::sin(beta * u), beta) * std::pow(std::sin((1 - beta) * u), 1 - beta) / std::sin(u),
                        1 / (1 - beta));
    return std::pow(a / e, (1 - beta) / beta);
}

void check_run(int n_steps, std::size_t n_paths) {
    if (n_steps < 1) throw ConfigError("mc: n_steps must be >= 1");
    if (n_paths < 1) throw ConfigError("mc: n_paths must be >= 1");
}

template <class F>
void for_paths(std::size_t n_paths, F body) {
    std::size_t blocks = (n_paths + kBlock - 1) / kBlock;
    parallel_for(blocks, [&](std::size_t b) {
        std::size_t hi = std::min(n_paths, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < hi; ++i) body(i);
    });
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

PathRng path_rng(std::uint64_t seed, std::uint64_t path) {
    return PathRng(splitmix64(splitmix64(seed) ^ path));
}

double sample_positive_stable(double beta, PathRng& rng) {
    if (!(beta > 0 && beta < 1)) throw ConfigError("sample_positive_stable: beta must lie in (0,1)");
    return std::pow(subordinator_scale(beta), 1 / beta) * stable_std(beta, rng);
}

IncrementSampler::IncrementSampler(const ModelSpec& m, double dt) : m_(m), dt_(dt), sqdt_(std::sqrt(dt)) {
    if (!(dt > 0)) throw ConfigError("mc: time step must be > 0");
    beta_ = m.beta();
    if (m.kind != ModelKind::BrownianMotion && !(m.kind == ModelKind::SymmetricStable && m.alpha == 2))
        scale_ = std::pow(subordinator_scale(beta_) * dt, 1 / beta_);
}

double IncrementSampler::operator()(PathRng& r) const {
    switch (m_.kind) {
        case ModelKind::BrownianMotion: return sqdt_ * normal(r);
        case ModelKind::SymmetricStable:
            if (m_.alpha == 2) return sqdt_ * normal(r);
            return std::sqrt(scale_ * stable_std(beta_, r)) * normal(r);
        case ModelKind::SubordinatedDriftBM: {
            double T = scale_ * stable_std(beta_, r);
            return m_.a * T + std::sqrt(T) * normal(r);
        }
        case ModelKind::SubordinatorMinusDrift: return scale_ * stable_std(beta_, r) - m_.a * dt_;
    }
    return 0;
}

double sample_increment(const ModelSpec& m, double dt, PathRng& rng) { return IncrementSampler(m, dt)(rng); }

std::vector<double> simulate_terminal(const ModelSpec& m, double t, std::size_t n_paths, std::uint64_t seed) {
    if (n_paths < 1) throw ConfigError("mc: n_paths must be >= 1");
    if (!(t > 0)) throw ConfigError("mc: t must be > 0");
    IncrementSampler inc(m, t);
    std::vector<double> x(n_paths);
    for_paths(n_paths, [&](std::size_t i) {
        PathRng r = path_rng(seed, i);
        x[i] = inc(r);
    });
    return x;
}

std::vector<PathSamples> simulate_at_times(const ModelSpec& m, const std::vector<double>& times, int steps_last,
                                           std::size_t n_paths, std::uint64_t seed, int coarse_every) {
    if (times.empty()) throw ConfigError("mc: no times");
    if (steps_last < 16) throw ConfigError("mc: n_steps must be >= 16");
    if (n_paths < 1) throw ConfigError("mc: n_paths must be >= 1");
    const double dt = times.back() / steps_last;
    std::vector<int> at;
    for (std::size_t c = 0; c < times.size(); ++c) {
        double q = times[c] / dt;
        int k = int(std::lround(q));
        if (!(times[c] > 0) || std::abs(q - k) > 1e-9 * q || (c > 0 && k <= at.back()))
            throw ConfigError("mc: times must increase and fall on the step grid");
        at.push_back(k);
        if (coarse_every > 0 && k % coarse_every != 0) throw ConfigError("mc: times must fall on the coarse grid");
    }
    if (coarse_every < 0) throw ConfigError("mc: coarse_every must be >= 0");
    std::vector<PathSamples> out(times.size());
    for (auto& s : out) {
        s.seed = seed;
        s.terminal.resize(n_paths);
        s.maximum.resize(n_paths);
        s.coarse_every = coarse_every;
        if (coarse_every) s.maximum_coarse.resize(n_paths);
    }
    for (std::size_t c = 0; c < times.size(); ++c) out[c].n_steps = at[c];
    IncrementSampler inc(m, dt);
    for_paths(n_paths, [&](std::size_t i) {
        PathRng r = path_rng(seed, i);
        double x = 0, mx = 0, mc = 0;
        std::size_t c = 0;
        for (int k = 1; k <= at.back(); ++k) {
            x += inc(r);
            mx = std::max(mx, x);
            if (coarse_every && k % coarse_every == 0) mc = std::max(mc, x);
            if (k == at[c]) {
                out[c].terminal[i] = x;
                out[c].maximum[i] = mx;
                if (coarse_every) out[c].maximum_coarse[i] = mc;
                ++c;
            }
        }
    });
    return out;
}

PathSamples simulate_terminal_and_max(const ModelSpec& m, double t, int n_steps, std::size_t n_paths,
                                      std::uint64_t seed) {
    if (!(t > 0)) throw ConfigError("mc: t must be > 0");
    return std::move(simulate_at_times(m, {t}, n_steps, n_paths, seed).front());
}

PassageSamples simulate_first_passage(const ModelSpec& m, double t_max, int n_steps, std::size_t n_paths,
                                      std::uint64_t seed) {
    check_run(n_steps, n_paths);
    if (!(t_max > 0)) throw ConfigError("mc: t_max must be > 0");
    PassageSamples s;
    s.seed = seed;
    s.t_max = t_max;
    s.dt = t_max / n_steps;
    s.tau.resize(n_paths);
    IncrementSampler inc(m, s.dt);
    for_paths(n_paths, [&](std::size_t i) {
        PathRng r = path_rng(seed, i);
        double x = 0, tau = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= n_steps; ++k) {
            x += inc(r);
            if (x > 0) {
                tau = k * s.dt;
                break;
            }
        }
        s.tau[i] = tau;
    });
    return s;
}

MCEstimate estimate_density(const std::vector<double>& samples, const std::vector<double>& edges) {
    if (edges.size() < 2) throw ConfigError("estimate_density: empty grid");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1])) throw ConfigError("estimate_density: bin edges must increase");
    if (samples.empty()) throw ConfigError("estimate_density: no samples");
    if (samples.size() < 1000) throw ConfigError("estimate_density: need at least 1000 samples");
    const std::size_t nb = edges.size() - 1;
    std::vector<std::size_t> count(nb, 0);
    for (double v : samples) {
        if (v < edges.front() || v >= edges.back()) continue;
        std::size_t b = std::upper_bound(edges.begin(), edges.end(), v) - edges.begin() - 1;
        ++count[b];
    }
    MCEstimate e;
    e.edges = edges;
    e.n_paths = samples.size();
    const double n = double(samples.size());
    for (std::size_t b = 0; b < nb; ++b) {
        double w = edges[b + 1] - edges[b], p = count[b] / n;
        e.density.push_back(p / w);
        e.stderr_.push_back(std::sqrt(p * (1 - p) / n) / w);
    }
    return e;
}

void write_mc_csv(const MCEstimate& e, const std::string& path) {
    std::ostringstream os;
    os << "bin_left,bin_right,density,stderr\n";
    for (std::size_t b = 0; b < e.density.size(); ++b)
        os << fmt17(e.edges[b]) << ',' << fmt17(e.edges[b + 1]) << ',' << fmt17(e.density[b]) << ','
           << fmt17(e.stderr_[b]) << '\n';
    write_file_atomic(path, os.str());
}

std::string mc_json(const MCEstimate& e) {
    nlohmann::ordered_json j;
    j["seed"] = e.seed;
    j["n_paths"] = e.n_paths;
    j["n_steps"] = e.n_steps;
    j["model"] = e.model;
    return j.dump(2) + "\n";
}

Proportion zero_fraction(const std::vector<double>& samples) {
    if (samples.empty()) throw ConfigError("zero_fraction: no samples");
    std::size_t z = std::count(samples.begin(), samples.end(), 0.0);
    double n = double(samples.size()), p = z / n;
    return {p, std::sqrt(p * (1 - p) / n)};
}

Proportion passage_survival(const PassageSamples& s, double t) {
    if (s.tau.empty()) throw ConfigError("passage_survival: no samples");
    if (t > s.t_max) throw ConfigError("passage_survival: t beyond the simulated horizon");
    std::size_t c = 0;
    for (double v : s.tau) c += v > t;
    double n = double(s.tau.size()), p = c / n;
    return {p, std::sqrt(p * (1 - p) / n)};
}

SkeletonZero skeleton_zero_fraction(const ModelSpec& m, const std::vector<double>& times, int steps_last,
                                    std::size_t n_paths, std::uint64_t seed) {
    SkeletonZero z;
    z.t = times;
    z.steps_coarse = steps_last;
    z.steps_fine = 4 * steps_last;
    auto f = simulate_at_times(m, times, z.steps_fine, n_paths, seed, 4);
    for (std::size_t k = 0; k < times.size(); ++k) {
        z.coarse.push_back(zero_fraction(f[k].maximum_coarse));
        z.fine.push_back(zero_fraction(f[k].maximum));
        z.allowance.push_back(std::max(0.0, z.coarse.back().value - z.fine.back().value));
    }
    return z;
}

SkeletonDensity skeleton_max_density(const ModelSpec& m, double t, int steps, std::size_t n_paths,
                                     std::uint64_t seed, const std::vector<double>& edges) {
    if (!(t > 0)) throw ConfigError("mc: t must be > 0");
    SkeletonDensity d;
    PathSamples ps = std::move(simulate_at_times(m, {t}, 4 * steps, n_paths, seed, 4).front());
    auto est = [&](std::vector<double>& mx, int n, MCEstimate& e, Proportion& z) {
        z = zero_fraction(mx);
        for (double& v : mx)
            if (v == 0) v = -INFINITY;
        e = estimate_density(mx, edges);
        e.seed = seed;
        e.n_steps = n;
        e.model = kind_name(m.kind);
    };
    est(ps.maximum_coarse, steps, d.coarse, d.zero_coarse);
    est(ps.maximum, 4 * steps, d.fine, d.zero_fine);
    for (std::size_t b = 0; b < d.fine.density.size(); ++b)
        d.allowance.push_back(d.coarse.density[b] - d.fine.density[b]);
    return d;
}

DStarEstimate estimate_ladder_time_drift(const ModelSpec& m, double t_max, int n_steps, std::size_t n_paths,
                                         std::uint64_t seed) {
    DStarEstimate e;
    if (regularity_profile(m).regular_up) {
        e.regular_up = true;
        e.note = "regular upward: d* = 0 exactly";
        return e;
    }
    PassageSamples s = simulate_first_passage(m, t_max, n_steps, n_paths, seed);
    // never-passed paths contribute exp(-tau) in [0, exp(-t_max)]; take the midpoint
    const double cap = std::exp(-t_max);
    double sum = 0, sum2 = 0;
    std::size_t never = 0;
    for (double tau : s.tau) {
        double v = std::isfinite(tau) ? std::exp(-tau) : 0.5 * cap;
        never += !std::isfinite(tau);
        sum += v;
        sum2 += v * v;
    }
    const double n = double(n_paths), mean = sum / n;
    e.never_passed = never / n;
    e.bracket = 0.5 * cap * e.never_passed;
    e.value = 1 - mean;
    e.stderr_ = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n) + e.bracket;
    e.note = "skeleton first passage: tau is overestimated, so d* is biased upward";
    return e;
}

DStarReport estimate_dstar_with_checks(const ModelSpec& m, double t_max, int n_steps, std::size_t n_paths,
                                       std::uint64_t seed) {
    DStarReport r;
    r.base = estimate_ladder_time_drift(m, t_max, n_steps, n_paths, seed);
    // an independent stream family for the stability check
    r.other_seed = estimate_ladder_time_drift(m, t_max, n_steps, n_paths, seed ^ 0x9e3779b97f4a7c15ULL);
    r.doubled = estimate_ladder_time_drift(m, t_max, 2 * n_steps, n_paths, seed);
    auto comb = [](const DStarEstimate& a, const DStarEstimate& b) {
        return std::hypot(a.stderr_, b.stderr_);
    };
    r.seed_stable = std::abs(r.base.value - r.other_seed.value) <= 3 * comb(r.base, r.other_seed);
    r.doubling_stable = std::abs(r.base.value - r.doubled.value) <= 2 * comb(r.base, r.doubled);
    r.d_star = r.doubled.value;
    r.d_star_stderr = r.doubled.stderr_;
    return r;
}

std::string dstar_json(const DStarReport& r, const ModelSpec& m, std::size_t n_paths, int n_steps, double t_max,
                       std::uint64_t seed) {
    auto est = [](const DStarEstimate& e) {
        nlohmann::ordered_json j;
        j["value"] = e.value;
        j["stderr"] = e.stderr_;
        j["bracket"] = e.bracket;
        j["never_passed"] = e.never_passed;
        return j;
    };
    nlohmann::ordered_json j;
    j["model"] = kind_name(m.kind);
    j["alpha"] = m.alpha;
    j["a"] = m.a;
    j["d_star"] = r.d_star;
    j["d_star_stderr"] = r.d_star_stderr;
    j["seed"] = seed;
    j["n_paths"] = n_paths;
    j["n_steps"] = n_steps;
    j["t_max"] = t_max;
    j["base"] = est(r.base);
    j["other_seed"] = est(r.other_seed);
    j["doubled_steps"] = est(r.doubled);
    j["seed_stable"] = r.seed_stable;
    j["doubling_stable"] = r.doubling_stable;
    j["note"] = r.base.note;
    return j.dump(2) + "\n";
}

}  // namespace lf
