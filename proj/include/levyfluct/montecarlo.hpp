#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "levyfluct/models.hpp"

namespace lf {

// Per-path engine; the stream depends on (seed, path) only.
using PathRng = std::mt19937_64;
PathRng path_rng(std::uint64_t seed, std::uint64_t path);
std::uint64_t splitmix64(std::uint64_t x);

// T_1 of the stable subordinator in the model normalization, E exp(-lam T_1) = exp(-C lam^beta)
double sample_positive_stable(double beta, PathRng& rng);
// increment of the model over a step of length dt
double sample_increment(const ModelSpec& m, double dt, PathRng& rng);

// same, with the step constants computed once
class IncrementSampler {
public:
    IncrementSampler(const ModelSpec& m, double dt);
    double operator()(PathRng& r) const;

private:
    ModelSpec m_;
    double dt_, sqdt_, beta_ = 0, scale_ = 0;
};

// X_t drawn exactly in one increment
std::vector<double> simulate_terminal(const ModelSpec& m, double t, std::size_t n_paths, std::uint64_t seed);

struct PathSamples {
    std::vector<double> terminal, maximum;  // X_t and the skeleton max, indexed by path
    std::vector<double> maximum_coarse;      // same paths, every coarse_every-th point only
    std::uint64_t seed = 0;
    int n_steps = 0, coarse_every = 0;
};
PathSamples simulate_terminal_and_max(const ModelSpec& m, double t, int n_steps, std::size_t n_paths,
                                      std::uint64_t seed);
// one skeleton read at several times; the step is times.back()/steps_last and every time must sit on it.
// coarse_every > 0 also records the max over the thinned skeleton of the same paths.
std::vector<PathSamples> simulate_at_times(const ModelSpec& m, const std::vector<double>& times, int steps_last,
                                           std::size_t n_paths, std::uint64_t seed, int coarse_every = 0);

// first skeleton time with X > 0, +inf if none up to t_max
struct PassageSamples {
    std::vector<double> tau;
    double t_max = 0, dt = 0;
    std::uint64_t seed = 0;
};
PassageSamples simulate_first_passage(const ModelSpec& m, double t_max, int n_steps, std::size_t n_paths,
                                      std::uint64_t seed);

struct MCEstimate {
    std::vector<double> edges;  // bins [edges[i], edges[i+1])
    std::vector<double> density, stderr_;
    std::size_t n_paths = 0;
    int n_steps = 0;
    std::uint64_t seed = 0;
    std::string model;
};
MCEstimate estimate_density(const std::vector<double>& samples, const std::vector<double>& edges);
void write_mc_csv(const MCEstimate& e, const std::string& path);
std::string mc_json(const MCEstimate& e);

// fraction of samples equal to zero, with its standard error
struct Proportion {
    double value = 0, stderr_ = 0;
};
Proportion zero_fraction(const std::vector<double>& samples);
Proportion passage_survival(const PassageSamples& s, double t);  // P(tau > t)

// P(skeleton max = 0) at several times, from a coarse and a 4x finer skeleton.
// The skeleton misses crossings with small overshoot, a bias of order sqrt(dt); with that rate
// the coarse-minus-fine gap estimates the remaining bias of the fine run.
struct SkeletonZero {
    std::vector<double> t;
    std::vector<Proportion> coarse, fine;
    std::vector<double> allowance;  // one-sided: the fine estimate may exceed the truth by this much
    int steps_coarse = 0, steps_fine = 0;
};
SkeletonZero skeleton_zero_fraction(const ModelSpec& m, const std::vector<double>& times, int steps_last,
                                    std::size_t n_paths, std::uint64_t seed);

// Density of the skeleton max on (0, inf) with the atom at 0 left out, coarse and 4x finer.
// The coarse skeleton is every 4th point of the fine one.
// allowance[b] = coarse - fine: the fine estimate may sit off the truth in this direction by up to |allowance|.
struct SkeletonDensity {
    MCEstimate coarse, fine;
    Proportion zero_coarse, zero_fine;
    std::vector<double> allowance;
};
SkeletonDensity skeleton_max_density(const ModelSpec& m, double t, int steps, std::size_t n_paths,
                                     std::uint64_t seed, const std::vector<double>& edges);

struct DStarEstimate {
    double value = 0, stderr_ = 0;
    double bracket = 0;        // half-width from paths that never passed by t_max
    double never_passed = 0;   // their fraction
    bool regular_up = false;   // estimate is exactly 0
    std::string note;
};
// d* = 1 - E exp(-tau), tau = first passage into (0, inf)
DStarEstimate estimate_ladder_time_drift(const ModelSpec& m, double t_max, int n_steps, std::size_t n_paths,
                                         std::uint64_t seed);

struct DStarReport {
    DStarEstimate base, other_seed, doubled;
    bool seed_stable = false, doubling_stable = false;
    double d_star = 0;  // the doubled-step estimate
    double d_star_stderr = 0;
};
DStarReport estimate_dstar_with_checks(const ModelSpec& m, double t_max, int n_steps, std::size_t n_paths,
                                       std::uint64_t seed);
std::string dstar_json(const DStarReport& r, const ModelSpec& m, std::size_t n_paths, int n_steps, double t_max,
                       std::uint64_t seed);

// expected shift of the BM skeleton maximum below the true one, per unit sqrt(dt)
inline constexpr double kSkeletonShift = 0.5826;

}  // namespace lf
