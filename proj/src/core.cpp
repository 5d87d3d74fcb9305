#include "levyfluct/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace lf {

const char* kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::BrownianMotion: return "brownian";
        case ModelKind::SubordinatedDriftBM: return "sub_bm";
        case ModelKind::SubordinatorMinusDrift: return "sub_drift";
        case ModelKind::SymmetricStable: return "sym_stable";
    }
    return "?";
}

ModelKind kind_from_name(const std::string& s) {
    if (s == "brownian") return ModelKind::BrownianMotion;
    if (s == "sub_bm") return ModelKind::SubordinatedDriftBM;
    if (s == "sub_drift") return ModelKind::SubordinatorMinusDrift;
    if (s == "sym_stable") return ModelKind::SymmetricStable;
    throw ConfigError("unknown model '" + s + "' (brownian | sub_bm | sub_drift | sym_stable)");
}

ModelSpec ModelSpec::make(ModelKind kind, double alpha, double a, std::optional<double> d_star) {
    ModelSpec m;
    m.kind = kind;
    m.alpha = alpha;
    m.a = a;
    switch (kind) {
        case ModelKind::BrownianMotion:
            m.alpha = 2.0;
            m.a = 0.0;
            break;
        case ModelKind::SymmetricStable:
            m.a = 0.0;
            break;
        case ModelKind::SubordinatedDriftBM:
            m.symmetric = false;
            break;
        case ModelKind::SubordinatorMinusDrift:
            m.symmetric = false;
            m.regular_up = false;
            m.d_star = d_star;
            break;
    }
    if (kind != ModelKind::SubordinatorMinusDrift && d_star && *d_star != 0.0)
        throw InvariantError(std::string(kind_name(kind)) + " is regular upward, d* must be 0");
    m.validate();
    return m;
}

void ModelSpec::validate() const {
    if (!std::isfinite(alpha) || !std::isfinite(a)) throw ConfigError("non-finite model parameter");
    switch (kind) {
        case ModelKind::BrownianMotion: break;
        case ModelKind::SymmetricStable:
            if (!(alpha > 0 && alpha < 2))
                throw ConfigError("sym_stable needs alpha in (0,2); alpha=2 is brownian");
            break;
        case ModelKind::SubordinatedDriftBM:
        case ModelKind::SubordinatorMinusDrift:
            if (!(alpha > 0 && alpha < 2)) throw ConfigError("alpha must lie in (0,2)");
            if (!(a > 0)) throw ConfigError("drift a must be > 0");
            break;
    }
    if (d < 0) throw InvariantError("d < 0");
    if (d_star) {
        if (*d_star < 0) throw InvariantError("d* < 0");
        if (d * *d_star != 0) throw InvariantError("d * d* must vanish");
        if (regular_up != (*d_star == 0)) throw InvariantError("regular_up must be equivalent to d* = 0");
    } else if (regular_up) {
        throw InvariantError("d* unknown for a regular-up model");
    }
    if (regular_down != (d == 0)) throw InvariantError("regular_down must be equivalent to d = 0");
}

double ModelSpec::dstar_or_throw() const {
    if (!d_star) throw PrerequisiteError("d* unknown: run `levyfluct mc <config>` with mode = estimate-dstar first");
    return *d_star;
}

TimeGrid build_time_grid(double T, int n, double gamma) {
    if (!(std::isfinite(T) && T > 0)) throw ConfigError("time grid: T must be finite and > 0");
    if (n < 2) throw ConfigError("time grid: n must be >= 2");
    if (!(std::isfinite(gamma) && gamma >= 1)) throw ConfigError("time grid: gamma must be >= 1");
    TimeGrid g;
    g.T = T;
    g.gamma = gamma;
    g.t.resize(n);
    for (int k = 1; k <= n; ++k) g.t[k - 1] = T * std::pow(double(k) / n, gamma);
    g.t.back() = T;
    return g;
}

SpaceGrid build_space_grid(double x0, double x1, int m, SpaceMode mode) {
    if (!(std::isfinite(x0) && std::isfinite(x1) && x1 > x0)) throw ConfigError("space grid: need x_min < x_max");
    if (m < 1) throw ConfigError("space grid: m must be >= 1");
    SpaceGrid g;
    g.mode = mode;
    g.x.resize(m + 1);
    if (mode == SpaceMode::Geometric) {
        if (!(x0 > 0)) throw ConfigError("geometric space grid needs x_min > 0");
        double r = std::log(x1 / x0);
        for (int j = 0; j <= m; ++j) g.x[j] = x0 * std::exp(r * j / m);
    } else {
        for (int j = 0; j <= m; ++j) g.x[j] = x0 + (x1 - x0) * j / m;
    }
    g.x.front() = x0;
    g.x.back() = x1;
    return g;
}

Field2D::Field2D(TimeGrid t, SpaceGrid x, std::string lab)
    : tg(std::move(t)), xg(std::move(x)), v(tg.size() * xg.size(), 0.0), label(std::move(lab)) {}

std::vector<double> Field2D::row(std::size_t k) const {
    return {v.begin() + k * xg.size(), v.begin() + (k + 1) * xg.size()};
}

namespace {

double integrate_nodes(const std::vector<double>& x, const std::vector<double>& y, double a, double b) {
    if (!(b > a)) throw NumericalError("integrate: empty range");
    if (a < x.front() - 1e-12 * std::abs(x.front()) || b > x.back() + 1e-12 * std::abs(x.back()))
        throw NumericalError("integrate: range outside grid");
    a = std::max(a, x.front());
    b = std::min(b, x.back());
    double s = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        double lo = std::max(a, x[i]), hi = std::min(b, x[i + 1]);
        if (hi <= lo) continue;
        double w = x[i + 1] - x[i];
        double ylo = y[i] + (y[i + 1] - y[i]) * (lo - x[i]) / w;
        double yhi = y[i] + (y[i + 1] - y[i]) * (hi - x[i]) / w;
        s += 0.5 * (hi - lo) * (ylo + yhi);
    }
    return s;
}

std::size_t bracket(const std::vector<double>& x, double q) {
    auto it = std::upper_bound(x.begin(), x.end(), q);
    std::size_t i = it == x.begin() ? 0 : std::size_t(it - x.begin()) - 1;
    return std::min(i, x.size() - 2);
}

}  // namespace

double integrate_space(const Field2D& f, std::size_t k, double xa, double xb) {
    return integrate_nodes(f.xg.x, f.row(k), xa, xb);
}

double integrate_time(const Field2D& f, std::size_t j, double ta, double tb) {
    std::vector<double> y(f.tg.size());
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = f.at(k, j);
    return integrate_nodes(f.tg.t, y, ta, tb);
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
    return s;
}

double interp_linear(const std::vector<double>& x, const std::vector<double>& y, double q) {
    if (x.size() == 1) return y[0];
    std::size_t i = bracket(x, q);
    double w = (q - x[i]) / (x[i + 1] - x[i]);
    if (w == 0) return y[i];
    if (w == 1) return y[i + 1];
    return y[i] + w * (y[i + 1] - y[i]);
}

double interpolate(const Field2D& f, double t, double x) {
    const auto& T = f.tg.t;
    const auto& X = f.xg.x;
    auto out = [&](double lo, double hi, double q) {
        double tol = 1e-12 * std::max(std::abs(lo), std::abs(hi));
        return q < lo - tol || q > hi + tol;
    };
    if (out(T.front(), T.back(), t) || out(X.front(), X.back(), x))
        throw NumericalError("interpolate: query outside grid hull");
    std::size_t k = T.size() > 1 ? bracket(T, t) : 0;
    std::size_t j = X.size() > 1 ? bracket(X, x) : 0;
    double wt = 0, wx = 0;
    if (T.size() > 1) wt = std::clamp((std::log(t) - std::log(T[k])) / (std::log(T[k + 1]) - std::log(T[k])), 0.0, 1.0);
    if (X.size() > 1) wx = std::clamp((x - X[j]) / (X[j + 1] - X[j]), 0.0, 1.0);
    auto val = [&](std::size_t kk, std::size_t jj) { return f.at(std::min(kk, T.size() - 1), std::min(jj, X.size() - 1)); };
    // exact node hits return the stored value untouched
    if (wt == 0 && wx == 0) return val(k, j);
    double v0 = wx == 0 ? val(k, j) : (1 - wx) * val(k, j) + wx * val(k, j + 1);
    if (wt == 0) return v0;
    double v1 = wx == 0 ? val(k + 1, j) : (1 - wx) * val(k + 1, j) + wx * val(k + 1, j + 1);
    if (wt == 1) return v1;
    return (1 - wt) * v0 + wt * v1;
}

void clamp_nonnegative(std::vector<double>& v, const std::string& what, double eps) {
    double mx = 0;
    for (double x : v) {
        if (!std::isfinite(x)) throw InvariantError(what + ": non-finite value");
        mx = std::max(mx, std::abs(x));
    }
    double floor = -eps * mx;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < floor) {
            std::ostringstream os;
            os << what << ": value " << v[i] << " at index " << i << " below -eps_neg = " << floor;
            throw InvariantError(os.str());
        }
        if (v[i] < 0) v[i] = 0;
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot write " + tmp.string());
        os << content;
        if (!os) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, p);
}

void write_field_csv(const Field2D& f, const std::string& path, const std::string& value_name) {
    std::string s = "t,x," + value_name + "\n";
    s.reserve(f.v.size() * 64);
    for (std::size_t k = 0; k < f.tg.size(); ++k)
        for (std::size_t j = 0; j < f.xg.size(); ++j)
            s += fmt17(f.tg.t[k]) + "," + fmt17(f.xg.x[j]) + "," + fmt17(f.at(k, j)) + "\n";
    write_file_atomic(path, s);
}

double pl_tail(const std::vector<double>& y, double h, double x) {
    const int M = int(y.size()) - 1;
    if (x >= M * h) return 0;
    int c = std::max(0, int(std::floor(x / h)));
    double a = x - c * h;
    double ya = y[c] + (y[c + 1] - y[c]) * a / h;
    double acc = 0.5 * (ya + y[c + 1]) * (h - a);
    for (int j = c + 1; j < M; ++j) acc += 0.5 * h * (y[j] + y[j + 1]);
    return acc;
}

Field2D read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,x,", 0) != 0) throw MissingInputError(path + ": not a field csv");
    std::string label = line.substr(4);
    std::vector<double> ts, xs, vs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double t, x, v;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &x, &v) != 3) throw MissingInputError(path + ": bad row");
        ts.push_back(t);
        xs.push_back(x);
        vs.push_back(v);
    }
    if (vs.empty()) throw MissingInputError(path + ": no rows");
    std::size_t nx = 1;
    while (nx < ts.size() && ts[nx] == ts[0]) ++nx;
    if (ts.size() % nx) throw MissingInputError(path + ": ragged grid");
    TimeGrid tg;
    SpaceGrid xg;
    for (std::size_t k = 0; k < ts.size(); k += nx) tg.t.push_back(ts[k]);
    xg.x.assign(xs.begin(), xs.begin() + nx);
    tg.T = tg.t.back();
    Field2D f(tg, xg, label);
    f.v = vs;
    return f;
}

}  // namespace lf
