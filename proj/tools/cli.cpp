#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "CLI11.hpp"
#include "json.hpp"
#include "levyfluct/asymptotics.hpp"
#include "levyfluct/montecarlo.hpp"
#include "levyfluct/parallel.hpp"
#include "levyfluct/supremum.hpp"

namespace lf::cli {

namespace fs = std::filesystem;
using J = nlohmann::ordered_json;

namespace {

const std::map<std::string, std::set<std::string>> kKeys = {
    {"model", {"model", "alpha", "a", "d_star"}},
    {"time", {"T", "n", "gamma"}},
    {"space", {"x_min", "x_max", "m", "mode"}},
    {"solver",
     {"space_intervals", "time_refine", "tol_solve", "tol_cross", "tol_consistency", "tail_tol", "check_t_min",
      "check_x_min", "check_x_max"}},
    {"mc", {"seed", "n_paths", "n_steps", "t", "t_max", "bins", "x_lo", "x_hi"}},
    {"asymptotics",
     {"x0", "t0", "eps_final", "x0_large", "jitter", "noise_floor", "window_t0", "window_x_lo", "window_x_hi",
      "comparability_bound", "comparability_lo", "comparability_hi", "tail_x0", "tail_eps", "bound_x1", "bound_B"}},
    {"output", {"dir"}},
};

double to_double(const std::string& key, const std::string& s) {
    try {
        std::size_t pos;
        double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    if (s == "inf") return INFINITY;
    throw ConfigError("key '" + key + "': not a number: '" + s + "'");
}

long long to_int(const std::string& key, const std::string& s) {
    try {
        std::size_t pos;
        long long v = std::stoll(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("key '" + key + "': not an integer: '" + s + "'");
}

struct Reader {
    const Section* sec = nullptr;
    std::string name;
    bool has(const std::string& k) const { return sec && sec->count(k); }
    std::string full(const std::string& k) const { return name + "." + k; }
    void num(const std::string& k, double& v) const {
        if (has(k)) v = to_double(full(k), sec->at(k));
    }
    template <class I>
    void integer(const std::string& k, I& v) const {
        if (has(k)) v = I(to_int(full(k), sec->at(k)));
    }
};

Reader reader(const RunConfig& c, const std::string& name) {
    auto it = c.raw.find(name);
    return {it == c.raw.end() ? nullptr : &it->second, name};
}

std::string out_file(const RunConfig& c, const std::string& name) { return (fs::path(c.out) / name).string(); }

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw MissingInputError("missing input " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

J read_json(const std::string& path) {
    try {
        return J::parse(slurp(path));
    } catch (const J::parse_error& e) {
        throw MissingInputError("unreadable " + path + ": " + e.what());
    }
}

TimeGrid time_grid(const RunConfig& c) { return build_time_grid(c.T, c.n, c.gamma); }
SpaceGrid space_grid(const RunConfig& c) { return build_space_grid(c.x_min, c.x_max, c.m, c.mode); }

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> e(n + 1);
    for (int i = 0; i <= n; ++i) e[i] = a + (b - a) * i / n;
    return e;
}

// bin average of the model density, composite Simpson on 32 panels
double bin_average(const Model& m, double t, double a, double b) {
    const int n = 32;
    double h = (b - a) / n, s = m.p(t, a) + m.p(t, b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * m.p(t, a + i * h);
    return s * h / 3 / (b - a);
}

// z-scores of a histogram against reference bin averages; se falls back to the reference binomial error
J compare_bins(const MCEstimate& e, const std::vector<double>& ref, const std::vector<double>& allowance) {
    J bins = J::array();
    std::size_t ok = 0;
    const double n = double(e.n_paths);
    for (std::size_t b = 0; b < ref.size(); ++b) {
        double w = e.edges[b + 1] - e.edges[b], pm = std::clamp(ref[b] * w, 0.0, 1.0);
        double se = std::max(e.stderr_[b], std::sqrt(pm * (1 - pm) / n) / w);
        double dev = e.density[b] - ref[b], z = se > 0 ? dev / se : 0;
        double al = allowance.empty() ? 0 : allowance[b];
        bool pass = std::abs(z) <= 3 || (al != 0 && dev * al > 0 && std::abs(dev) <= 3 * se + std::abs(al));
        ok += pass;
        bins.push_back(J{{"bin_left", e.edges[b]},
                         {"bin_right", e.edges[b + 1]},
                         {"mc", e.density[b]},
                         {"reference", ref[b]},
                         {"stderr", se},
                         {"z", z},
                         {"allowance", al},
                         {"pass", pass}});
    }
    J j;
    j["bins"] = bins;
    j["fraction_within"] = ref.empty() ? 0.0 : double(ok) / ref.size();
    return j;
}

ModelSpec spec_with_dstar(const RunConfig& c, double ds) {
    return ModelSpec::make(c.model.kind, c.model.alpha, c.model.a, ds);
}

// d* from the config, or from a previous `mc estimate-dstar` run in the output directory
double resolve_dstar(const RunConfig& c) {
    if (c.model.d_star) return *c.model.d_star;
    std::string p = out_file(c, "dstar.json");
    if (!fs::exists(p))
        throw PrerequisiteError(std::string("d* is unknown for ") + kind_name(c.model.kind) +
                                ": run `levyfluct mc estimate-dstar " + c.path +
                                "` first, or set d_star in [model]");
    J j = read_json(p);
    if (j.value("model", "") != kind_name(c.model.kind) || j.value("alpha", NAN) != c.model.alpha ||
        j.value("a", NAN) != c.model.a)
        throw PrerequisiteError(p + " was estimated for a different model; rerun `levyfluct mc estimate-dstar`");
    if (!j.value("seed_stable", false))
        throw PrerequisiteError(p + " failed its seed-stability check; rerun with more paths");
    return j.at("d_star").get<double>();
}

std::vector<std::vector<double>> read_columns(const std::string& path, std::vector<std::string>& header) {
    std::ifstream is(path);
    if (!is) throw MissingInputError("missing input " + path);
    std::string line;
    if (!std::getline(is, line)) throw MissingInputError("empty " + path);
    header.clear();
    {
        std::stringstream ss(line);
        std::string h;
        while (std::getline(ss, h, ',')) header.push_back(h);
    }
    std::vector<std::vector<double>> cols(header.size());
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string v;
        std::size_t i = 0;
        while (std::getline(ss, v, ',') && i < cols.size()) cols[i++].push_back(std::strtod(v.c_str(), nullptr));
        if (i != cols.size()) throw MissingInputError("malformed row in " + path);
    }
    return cols;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    RunConfig c;
    c.path = origin;
    for (const auto& [name, node] : tree) {
        if (node.empty() && !node.data().empty())
            throw ConfigError("key '" + name + "' outside any section");
        auto allowed = kKeys.find(name);
        if (allowed == kKeys.end()) throw ConfigError("unknown section [" + name + "]");
        Section& s = c.raw[name];
        for (const auto& [k, v] : node) {
            if (!allowed->second.count(k)) throw ConfigError("unknown key '" + name + "." + k + "'");
            s[k] = v.data();
        }
    }
    if (!c.raw.count("model")) throw ConfigError("missing section [model]");
    try {
        c.model = parse_model(c.raw["model"]);
    } catch (const InvariantError& e) {
        throw ConfigError(std::string("[model]: ") + e.what());
    }

    auto t = reader(c, "time");
    t.num("T", c.T);
    t.integer("n", c.n);
    t.num("gamma", c.gamma);
    auto s = reader(c, "space");
    s.num("x_min", c.x_min);
    s.num("x_max", c.x_max);
    s.integer("m", c.m);
    if (s.has("mode")) {
        const std::string& md = s.sec->at("mode");
        if (md == "linear") c.mode = SpaceMode::Linear;
        else if (md == "geometric") c.mode = SpaceMode::Geometric;
        else throw ConfigError("key 'space.mode': expected linear or geometric, got '" + md + "'");
    }
    auto so = reader(c, "solver");
    so.integer("space_intervals", c.solver.space_intervals);
    so.integer("time_refine", c.solver.time_refine);
    so.num("tol_solve", c.solver.tol_solve);
    so.num("tol_cross", c.solver.tol_cross);
    so.num("tol_consistency", c.solver.tol_consistency);
    so.num("tail_tol", c.solver.tail_tol);
    so.num("check_t_min", c.solver.check_t_min);
    so.num("check_x_min", c.solver.check_x_min);
    so.num("check_x_max", c.solver.check_x_max);
    auto mc = reader(c, "mc");
    if (mc.has("seed")) {
        long long v = to_int("mc.seed", mc.sec->at("seed"));
        if (v < 0) throw ConfigError("key 'mc.seed': must be nonnegative");
        c.mc.seed = std::uint64_t(v);
    }
    mc.integer("n_paths", c.mc.n_paths);
    mc.integer("n_steps", c.mc.n_steps);
    mc.num("t", c.mc.t);
    mc.num("t_max", c.mc.t_max);
    mc.integer("bins", c.mc.bins);
    mc.num("x_lo", c.mc.x_lo);
    mc.num("x_hi", c.mc.x_hi);
    auto as = reader(c, "asymptotics");
    auto& A = c.asym;
    as.num("x0", A.x0);
    as.num("t0", A.t0);
    as.num("eps_final", A.eps_final);
    as.num("x0_large", A.x0_large);
    as.num("jitter", A.jitter);
    as.num("noise_floor", A.noise_floor);
    as.num("window_t0", A.window_t0);
    as.num("window_x_lo", A.window_x_lo);
    as.num("window_x_hi", A.window_x_hi);
    as.num("comparability_bound", A.comparability_bound);
    as.num("comparability_lo", A.comparability_lo);
    as.num("comparability_hi", A.comparability_hi);
    as.num("tail_x0", A.tail_x0);
    as.num("tail_eps", A.tail_eps);
    as.num("bound_x1", A.bound_x1);
    as.num("bound_B", A.bound_B);
    auto o = reader(c, "output");
    c.out = o.has("dir") ? o.sec->at("dir") : "out";

    if (!(c.T > 0) || c.n < 2 || !(c.gamma >= 1)) throw ConfigError("[time]: need T > 0, n >= 2, gamma >= 1");
    if (!(c.x_max > c.x_min) || c.m < 1) throw ConfigError("[space]: need x_max > x_min and m >= 1");
    if (c.mc.n_paths < 1 || c.mc.bins < 1) throw ConfigError("[mc]: n_paths and bins must be positive");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read config " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), path);
}

int cmd_density(const RunConfig& c) {
    Model model(c.model.d_star ? c.model : spec_with_dstar(c, 0.5));  // p does not depend on d*
    TimeGrid tg = time_grid(c);
    SpaceGrid xg = space_grid(c);
    Field2D p(tg, xg, "p");
    parallel_for(tg.size(), [&](std::size_t k) {
        for (std::size_t j = 0; j < xg.size(); ++j) p.at(k, j) = model.p(tg.t[k], xg.x[j]);
    });
    write_field_csv(p, out_file(c, "p.csv"), "p");
    std::string nu = "x,nu\n";
    for (double x : xg.x) {
        if (x == 0) continue;
        double v = c.model.kind == ModelKind::BrownianMotion ? 0.0 : model.levy_density(x);
        nu += fmt17(x) + "," + fmt17(v) + "\n";
    }
    write_file_atomic(out_file(c, "nu.csv"), nu);
    std::cout << "wrote p.csv, nu.csv to " << c.out << "\n";
    return 0;
}

int cmd_pipeline(const RunConfig& c) {
    const double ds = resolve_dstar(c);
    Model model(spec_with_dstar(c, ds));
    const SolverOptions& opt = c.solver;
    QStarSolution sol = solve_qstar(model, time_grid(c), space_grid(c), opt);
    ExcursionFunctions ex = excursion_mass(sol, opt);
    solve_dual_tail(ex, opt);
    PipelineChecks chk;
    chk.renewal_residual = renewal_residual(ex);
    chk.scalar_mass = scalar_mass_equation_check(model, ex);
    if (model.spec().symmetric) {
        chk.dual_symmetry = 0;
        for (std::size_t k = 0; k < ex.t.size(); ++k)
            chk.dual_symmetry = std::max(chk.dual_symmetry, std::abs(ex.m[k] / ex.m_star[k] - 1));
    }
    SupremumSolution sup = supremum_density(model, sol, ex);

    write_field_csv(sol.q, out_file(c, "qstar.csv"), "qstar");
    write_field_csv(sup.f, out_file(c, "f.csv"), "f");
    write_field_csv(qstar_tail_field(sol), out_file(c, "qstar_tail.csv"), "qstar_tail");
    std::string exs = "t,m_star,N_star,m,N\n";
    for (std::size_t k = 0; k < ex.t.size(); ++k)
        exs += fmt17(ex.t[k]) + "," + fmt17(ex.m_star[k]) + "," + fmt17(ex.N_star[k]) + "," + fmt17(ex.m[k]) + "," +
               fmt17(ex.N[k]) + "\n";
    write_file_atomic(out_file(c, "excursions.csv"), exs);

    J d = J::parse(diagnostics_json(sol, ex, chk, opt));
    J mb = J::parse(mass_balance_json(sup));
    const double mass_dev = mb["max_abs_deviation"].get<double>();
    const bool mass_ok = mass_dev <= 0.01;
    d["model"] = kind_name(model.spec().kind);
    d["mass_balance"] = mb;
    d["mass_balance_pass"] = mass_ok;
    const bool pass = d["pass"].get<bool>() && mass_ok;
    d["pass"] = pass;
    write_file_atomic(out_file(c, "diagnostics.json"), d.dump(2) + "\n");

    std::printf("residual defining %.4g, cross %.4g, renewal %.4g, scalar mass %.4g, mass balance %.4g\n",
                sol.residuals.residual_defining, sol.residuals.residual_cross, chk.renewal_residual, chk.scalar_mass,
                mass_dev);
    if (!pass) {
        std::cerr << "levyfluct: invariant check failed, see " << out_file(c, "diagnostics.json") << "\n";
        return 5;
    }
    return 0;
}

int cmd_mc(const RunConfig& c, const std::string& sub) {
    if (!c.mc.seed) throw ConfigError("missing key 'mc.seed' (seeds are never taken from the clock)");
    const std::uint64_t seed = *c.mc.seed;
    const MCConfig& mc = c.mc;
    // the increments never read d*
    ModelSpec spec = c.model.d_star ? c.model : spec_with_dstar(c, 0.5);

    if (sub == "estimate-dstar") {
        DStarReport r = estimate_dstar_with_checks(spec, mc.t_max, mc.n_steps, mc.n_paths, seed);
        write_file_atomic(out_file(c, "dstar.json"), dstar_json(r, spec, mc.n_paths, mc.n_steps, mc.t_max, seed));
        std::printf("d* = %.6g +- %.2g (seed stable: %s, doubling stable: %s)\n", r.d_star, r.d_star_stderr,
                    r.seed_stable ? "yes" : "no", r.doubling_stable ? "yes" : "no");
        if (!r.seed_stable) {
            std::cerr << "levyfluct: d* estimate is not seed stable\n";
            return 5;
        }
        return 0;
    }
    if (sub != "density" && sub != "supremum")
        throw ConfigError("unknown mc subcommand '" + sub + "' (density | supremum | estimate-dstar)");
    if (std::isnan(mc.x_hi)) throw ConfigError("missing key 'mc.x_hi'");
    Model model(spec);

    if (sub == "density") {
        if (std::isnan(mc.x_lo)) throw ConfigError("missing key 'mc.x_lo'");
        auto samples = simulate_terminal(spec, mc.t, mc.n_paths, seed);
        MCEstimate e = estimate_density(samples, linspace(mc.x_lo, mc.x_hi, mc.bins));
        e.seed = seed;
        e.model = kind_name(spec.kind);
        write_mc_csv(e, out_file(c, "mc_density.csv"));
        std::vector<double> ref;
        for (int b = 0; b < mc.bins; ++b) ref.push_back(bin_average(model, mc.t, e.edges[b], e.edges[b + 1]));
        J j = J::parse(mc_json(e));
        j["t"] = mc.t;
        j["comparison"] = compare_bins(e, ref, {});
        j["comparison"]["reference"] = "models.p";
        write_file_atomic(out_file(c, "mc_density.json"), j.dump(2) + "\n");
        std::printf("p histogram: %.1f%% of bins within 3 stderr\n",
                    100 * j["comparison"]["fraction_within"].get<double>());
        return 0;
    }

    double lo = std::isnan(mc.x_lo) ? 0.0 : mc.x_lo;
    SkeletonDensity sd = skeleton_max_density(spec, mc.t, mc.n_steps, mc.n_paths, seed, linspace(lo, mc.x_hi, mc.bins));
    const MCEstimate& e = sd.fine;
    write_mc_csv(e, out_file(c, "mc_supremum.csv"));
    J j = J::parse(mc_json(e));
    j["t"] = mc.t;
    j["steps_coarse"] = sd.coarse.n_steps;
    j["zero_fraction"] = {{"value", sd.zero_fine.value}, {"stderr", sd.zero_fine.stderr_},
                          {"coarse", sd.zero_coarse.value}};
    j["coarse_density"] = sd.coarse.density;
    j["skeleton_allowance"] = sd.allowance;

    std::string fpath = out_file(c, "f.csv");
    if (fs::exists(fpath)) {
        Field2D f = read_field_csv(fpath);
        std::size_t k = f.tg.size();
        for (std::size_t i = 0; i < f.tg.size(); ++i)
            if (std::abs(f.tg.t[i] / mc.t - 1) < 1e-9) k = i;
        if (k == f.tg.size()) {
            j["comparison"] = {{"note", "t is not a node of the pipeline grid"}};
        } else {
            const double xlast = f.xg.x.back(), xfirst = f.xg.x.front();
            // held constant below the first node, zero beyond the last
            auto mass = [&](double a, double b) {
                double below = std::max(0.0, std::min(b, xfirst) - std::max(a, 0.0)) * f.at(k, 0);
                a = std::clamp(a, xfirst, xlast);
                b = std::clamp(b, xfirst, xlast);
                return below + (b > a ? integrate_space(f, k, a, b) : 0.0);
            };
            std::vector<double> ref;
            for (int b = 0; b < mc.bins; ++b) ref.push_back(mass(e.edges[b], e.edges[b + 1]) / (e.edges[b + 1] - e.edges[b]));
            j["comparison"] = compare_bins(e, ref, sd.allowance);
            j["comparison"]["reference"] = "pipeline f";
        }
    }
    write_file_atomic(out_file(c, "mc_supremum.json"), j.dump(2) + "\n");
    std::printf("P(skeleton sup = 0) = %.6g +- %.2g (coarse %.6g)\n", sd.zero_fine.value, sd.zero_fine.stderr_,
                sd.zero_coarse.value);
    return 0;
}

int cmd_asymptotics(const RunConfig& c) {
    if (!fs::is_directory(c.out)) throw MissingInputError("no pipeline outputs: " + c.out + " does not exist");
    const auto& A = c.asym;
    for (auto [k, v] : {std::pair{"x0", A.x0}, {"t0", A.t0}, {"eps_final", A.eps_final}})
        if (std::isnan(v)) throw ConfigError(std::string("missing key 'asymptotics.") + k + "'");

    PipelineFields pf;
    pf.qstar = read_field_csv(out_file(c, "qstar.csv"));
    pf.f = read_field_csv(out_file(c, "f.csv"));
    pf.qstar_tail = read_field_csv(out_file(c, "qstar_tail.csv"));
    std::vector<std::string> hdr;
    auto cols = read_columns(out_file(c, "excursions.csv"), hdr);
    if (hdr.size() < 3 || hdr[1] != "m_star" || hdr[2] != "N_star")
        throw MissingInputError("excursions.csv: unexpected header");
    pf.m_star = cols[1];
    pf.N_star = cols[2];
    J diag = read_json(out_file(c, "diagnostics.json"));
    pf.d_star = diag.at("d_star").get<double>();
    if (pf.m_star.size() != pf.qstar.tg.size() || pf.f.tg.size() != pf.qstar.tg.size())
        throw MissingInputError("pipeline outputs are from different grids; rerun `levyfluct pipeline`");

    Model model(spec_with_dstar(c, c.model.d_star.value_or(pf.d_star)));
    pf.p = Field2D(pf.qstar.tg, pf.qstar.xg, "p");
    parallel_for(pf.p.tg.size(), [&](std::size_t k) {
        for (std::size_t j = 0; j < pf.p.xg.size(); ++j) pf.p.at(k, j) = model.p(pf.p.tg.t[k], pf.p.xg.x[j]);
    });

    const double floor = std::isnan(A.noise_floor) ? c.solver.tol_consistency : A.noise_floor;
    double xpos = INFINITY;
    for (double x : pf.qstar.xg.x)
        if (x > 0) xpos = std::min(xpos, x);
    const double x0L = std::isnan(A.x0_large) ? xpos : A.x0_large;
    const bool is_bm = model.spec().kind == ModelKind::BrownianMotion;
    auto floor_of = [&](Quantity q) { return q == Quantity::P ? 0.0 : floor; };
    auto tolerances = [&](Quantity q) {
        return std::map<std::string, double>{
            {"eps_final", A.eps_final}, {"jitter", A.jitter}, {"noise_floor", floor_of(q)}};
    };

    int status = 0;
    std::vector<std::pair<std::string, std::string>> summary;
    auto write = [&](const std::string& name, J j) {
        write_file_atomic(out_file(c, name), j.dump(2) + "\n");
        summary.emplace_back(name, j.value("verdict", "NONE"));
    };
    auto no_density = [&](const std::string& check) {
        return J{{"check", check},
                 {"model", kind_name(model.spec().kind)},
                 {"verdict", "NONE"},
                 {"reason", "no Levy density: ratio reports are undefined for brownian motion"}};
    };
    auto config_failure = [&](J j, const std::exception& e) {
        status = 2;
        j["verdict"] = "ERROR";
        j["reason"] = e.what();
        return j;
    };
    // one file, several ratio reports, verdict is the conjunction
    auto ratio_file = [&](const std::string& name, const std::string& check,
                          const std::vector<std::pair<Quantity, bool>>& items) {
        if (is_bm) return write(name, no_density(check));
        J j{{"check", check}, {"model", kind_name(model.spec().kind)}};
        try {
            J reps = J::array();
            bool pass = true;
            for (auto [q, small_t] : items) {
                RatioReport r = ratio_report(model, q, pf, small_t ? A.x0 : x0L, A.t0);
                Verdict v = small_t ? small_t_uniformity(r, A.x0, A.eps_final, A.jitter, floor_of(q))
                                    : large_x_uniformity(r, A.t0, A.eps_final, A.jitter, floor_of(q));
                pass = pass && v.pass;
                reps.push_back(J::parse(report_json(r, {v}, tolerances(q))));
            }
            j["verdict"] = pass ? "PASS" : "FAIL";
            j["reports"] = reps;
        } catch (const ConfigError& e) {
            j = config_failure(j, e);
        }
        write(name, j);
    };

    ratio_file("thm_3_1.json", "small t: p/(t nu) and q*/((d*+N*) nu)", {{Quantity::P, true}, {Quantity::QStar, true}});
    ratio_file("thm_3_2.json", "small t: f/(t nu)", {{Quantity::F, true}});
    ratio_file("thm_3_6.json", "large x: p/(t nu) and q*/((d*+N*) nu)", {{Quantity::P, false}, {Quantity::QStar, false}});
    ratio_file("thm_3_7.json", "large x: f/(t nu)", {{Quantity::F, false}});
    if (model.spec().kind == ModelKind::SubordinatedDriftBM)
        ratio_file("cor_4_1.json", "f/(t nu): small t on [x0, inf) and large x on (0, t0]",
                   {{Quantity::F, true}, {Quantity::F, false}});

    // comparability
    if (is_bm) {
        write("thm_3_4.json", no_density("two-sided comparability"));
    } else {
        J j{{"check", "two-sided comparability"}, {"model", kind_name(model.spec().kind)}};
        try {
            Window w{std::isnan(A.window_t0) ? A.t0 : A.window_t0, std::isnan(A.window_x_lo) ? A.x0 : A.window_x_lo,
                     A.window_x_hi};
            Comparability cp = comparability_check(model, pf, w, A.comparability_bound, A.comparability_lo,
                                                   A.comparability_hi);
            J ents = J::array();
            for (const auto& e : cp.entries)
                ents.push_back(
                    J{{"quantity", quantity_name(e.quantity)}, {"c_min", e.c_min}, {"c_max", e.c_max}, {"nodes", e.nodes}});
            j["window"] = {{"t0", w.t0}, {"x_lo", w.x_lo}, {"x_hi", std::isfinite(w.x_hi) ? J(w.x_hi) : J("inf")}};
            j["entries"] = ents;
            j["tolerances"] = {{"bound", cp.bound}, {"lo", cp.lo}, {"hi", std::isfinite(cp.hi) ? J(cp.hi) : J("inf")}};
            j["verdict"] = cp.pass ? "PASS" : "FAIL";
            j["input_hashes"] = {{"p", field_hash(pf.p)}, {"qstar", field_hash(pf.qstar)}, {"f", field_hash(pf.f)}};
        } catch (const ConfigError& e) {
            j = config_failure(j, e);
        }
        write("thm_3_4.json", j);
    }

    // entrance law tail trend
    {
        const double x0 = std::isnan(A.tail_x0) ? A.x0 : A.tail_x0;
        J j{{"check", "sup_{x >= x0} Q*(t,(x,inf)) h*(x) / n*(t < zeta) along decreasing t"},
            {"model", kind_name(model.spec().kind)}};
        if (!model.capabilities().has_h_star) {
            j["verdict"] = "NONE";
            j["reason"] = "model exposes no renewal function h*";
        } else {
            TailTrend tr = entrance_tail_trend(model, pf, x0, std::isnan(A.tail_eps) ? A.eps_final : A.tail_eps,
                                               A.jitter, floor);
            j["x0"] = x0;
            j["t"] = tr.t;
            j["s"] = tr.s;
            j["reason"] = tr.verdict.reason;
            j["tolerances"] = {{"eps_final", tr.verdict.eps_final}, {"jitter", tr.verdict.jitter},
                               {"noise_floor", tr.verdict.noise_floor}};
            j["verdict"] = tr.verdict.pass ? "PASS" : "FAIL";
            j["input_hashes"] = {{"qstar_tail", field_hash(pf.qstar_tail)}};
        }
        write("prop_3_1.json", j);
    }

    // boundedness of q*/(d* + N*) away from the origin
    {
        J j{{"check", "max_{x >= x1} q*_t(x) / (d* + N*(t)) for t <= t0"}, {"model", kind_name(model.spec().kind)}};
        try {
            Boundedness b = entrance_boundedness(pf, std::isnan(A.bound_x1) ? A.x0 : A.bound_x1, A.t0, A.bound_B);
            j["x1"] = b.x1;
            j["t0"] = b.t0;
            j["t"] = b.t;
            j["B"] = b.B;
            j["tolerances"] = {{"bound", b.bound}};
            j["verdict"] = b.pass ? "PASS" : "FAIL";
            j["input_hashes"] = {{"qstar", field_hash(pf.qstar)}};
        } catch (const ConfigError& e) {
            j = config_failure(j, e);
        }
        write("prop_3_2.json", j);
    }

    for (const auto& [name, verdict] : summary) std::cout << name << " " << verdict << "\n";
    return status;
}

int run(int argc, char** argv) {
    CLI::App app{"levyfluct: fluctuation densities of Levy processes"};
    app.require_subcommand(1);
    std::string config, out, mc_sub;
    auto add = [&](const char* name, const char* help) {
        auto* s = app.add_subcommand(name, help);
        s->add_option("config", config, "run config (INI)")->required();
        s->add_option("--out", out, "output directory, overrides [output] dir");
        return s;
    };
    auto* density = add("density", "p and nu on the configured grid");
    auto* pipeline = add("pipeline", "entrance law, excursion functions and supremum density");
    auto* mc = app.add_subcommand("mc", "Monte Carlo: density | supremum | estimate-dstar");
    mc->add_option("what", mc_sub, "density | supremum | estimate-dstar")
        ->required()
        ->check(CLI::IsMember({"density", "supremum", "estimate-dstar"}));
    mc->add_option("config", config, "run config (INI)")->required();
    mc->add_option("--out", out, "output directory, overrides [output] dir");
    auto* asym = add("asymptotics", "ratio reports from pipeline outputs");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        RunConfig c = load_config(config);
        if (!out.empty()) c.out = out;
        if (*density) return cmd_density(c);
        if (*pipeline) return cmd_pipeline(c);
        if (*mc) return cmd_mc(c, mc_sub);
        if (*asym) return cmd_asymptotics(c);
    } catch (const Error& e) {
        std::cerr << "levyfluct: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "levyfluct: " << e.what() << "\n";
        return 5;
    }
    return 2;
}

}  // namespace lf::cli
