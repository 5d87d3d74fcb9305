#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "levyfluct/entrance_law.hpp"

namespace lf::cli {

using Section = std::map<std::string, std::string>;

struct MCConfig {
    std::optional<std::uint64_t> seed;
    std::size_t n_paths = 100000;
    int n_steps = 1000;
    double t = 0.5, t_max = 5;
    int bins = 50;
    double x_lo = NAN, x_hi = NAN;
};

struct AsymptoticsConfig {
    double x0 = NAN, t0 = NAN, eps_final = NAN;
    double x0_large = NAN;  // left end of the large-x profile, defaults to the smallest positive grid node
    double jitter = 0.1;
    double noise_floor = NAN;  // pipeline fields; defaults to tol_consistency
    double window_t0 = NAN, window_x_lo = NAN, window_x_hi = INFINITY;
    double comparability_bound = 4, comparability_lo = 0, comparability_hi = INFINITY;
    double tail_x0 = NAN, tail_eps = NAN;
    double bound_x1 = NAN, bound_B = 10;
};

struct RunConfig {
    std::string path;
    std::map<std::string, Section> raw;
    ModelSpec model;
    double T = 1, gamma = 2;
    int n = 40;
    double x_min = 0, x_max = 4;
    int m = 200;
    SpaceMode mode = SpaceMode::Linear;
    SolverOptions solver;
    MCConfig mc;
    AsymptoticsConfig asym;
    std::string out;
};

// throws ConfigError naming the offending key
RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig load_config(const std::string& path);

int cmd_density(const RunConfig& c);
int cmd_pipeline(const RunConfig& c);
int cmd_mc(const RunConfig& c, const std::string& sub);
int cmd_asymptotics(const RunConfig& c);

// full command line, returns the exit code
int run(int argc, char** argv);

}  // namespace lf::cli
