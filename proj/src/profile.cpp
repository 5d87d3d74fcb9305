#include <algorithm>
#include <cmath>

#include "levyfluct/entrance_law.hpp"
#include "levyfluct/parallel.hpp"
#include "levyfluct/quad.hpp"

namespace lf {

namespace {

std::vector<double> log_grid(const ProfileOptions& o) {
    if (!(o.u_min > 0 && o.u_max > o.u_min && o.per_decade >= 4)) throw ConfigError("profile grid: bad options");
    std::vector<double> u;
    double step = std::pow(10.0, 1.0 / o.per_decade);
    for (double v = o.u_min; ; v *= step) {
        u.push_back(v);
        if (v >= o.u_max) break;
    }
    return u;
}

// weight of g_{i-1} / g_i at v inside [u_{i-1}, u_i]
double lam(double v, double a, double b) { return std::log(v / a) / std::log(b / a); }

struct Interp {
    std::vector<double> u, y;
    double slope0 = 0;  // log-log slope below u_0
    double operator()(double s) const {
        if (s <= u.front()) return y.front() * std::pow(s / u.front(), slope0);
        if (s >= u.back()) return y.back();
        double dl = std::log(u[1] / u[0]);
        std::size_t i = std::min<std::size_t>(std::size_t(std::log(s / u[0]) / dl), u.size() - 2);
        double w = std::clamp(lam(s, u[i], u[i + 1]), 0.0, 1.0);
        return (1 - w) * y[i] + w * y[i + 1];
    }
};

// product-integration march for  c(t_k) g_k = src_k - int_0^{t_k} s^{-th} g(s) K(t_k - s) ds
// with the integral linear in g; returns g. `diag` is the coefficient multiplying the unknown outside the integral.
template <class Kern, class Diag, class Src>
std::vector<double> march(const std::vector<double>& u, double th, Kern K, Diag diag, Src src, bool homogeneous) {
    const std::size_t N = u.size();
    std::vector<double> g(N, 0.0);
    auto cell0 = [&](double t, bool singular_end) {
        Nodes nd = graded_nodes(0, singular_end ? t / 2 : u[0], true, 30);
        if (singular_end) {
            Nodes r = graded_nodes(t / 2, t, false, 30);
            nd.x.insert(nd.x.end(), r.x.begin(), r.x.end());
            nd.w.insert(nd.w.end(), r.w.begin(), r.w.end());
        }
        double acc = 0;
        for (std::size_t q = 0; q < nd.x.size(); ++q) acc += nd.w[q] * std::pow(nd.x[q], -th) * K(t - nd.x[q]);
        return acc;
    };
    // k = 0
    {
        double w00 = cell0(u[0], true);
        if (homogeneous) {
            g[0] = 1.0;
        } else {
            double den = diag(0) + w00;
            g[0] = src(0) / den;
        }
    }
    for (std::size_t k = 1; k < N; ++k) {
        const double t = u[k];
        double known = g[0] * cell0(t, false);
        double dcoef = 0;
        for (std::size_t i = 1; i <= k; ++i) {
            Nodes nd = (i == k) ? graded_nodes(u[i - 1], u[i], false, 20) : gauss_nodes(u[i - 1], u[i]);
            double wa = 0, wb = 0;
            for (std::size_t q = 0; q < nd.x.size(); ++q) {
                double v = nd.x[q], l = lam(v, u[i - 1], u[i]);
                double f = nd.w[q] * std::pow(v, -th) * K(t - v);
                wa += (1 - l) * f;
                wb += l * f;
            }
            known += wa * g[i - 1];
            if (i < k)
                known += wb * g[i];
            else
                dcoef = wb;
        }
        double den = diag(k) + dcoef;
        if (!(std::abs(den) > 0)) throw NumericalError("profile march: singular step");
        g[k] = (src(k) - known) / den;
    }
    return g;
}

}  // namespace

double SingularProfile::operator()(double s) const {
    if (!(s > 0)) throw NumericalError("profile evaluated at s <= 0");
    double gv;
    if (s <= u.front()) {
        gv = g.front();
    } else if (s >= u.back()) {
        gv = g.back();
    } else {
        double dl = std::log(u[1] / u[0]);
        std::size_t i = std::min<std::size_t>(std::size_t(std::log(s / u[0]) / dl), u.size() - 2);
        double w = std::clamp(lam(s, u[i], u[i + 1]), 0.0, 1.0);
        gv = (1 - w) * g[i] + w * g[i + 1];
    }
    return std::pow(s, -theta) * gv;
}

void SingularProfile::finalize() {
    cum.assign(u.size(), 0.0);
    cum[0] = g.front() * std::pow(u.front(), 1 - theta) / (1 - theta);
    for (std::size_t i = 1; i < u.size(); ++i) {
        Nodes nd = gauss_nodes(u[i - 1], u[i]);
        double acc = 0;
        for (std::size_t q = 0; q < nd.x.size(); ++q) acc += nd.w[q] * (*this)(nd.x[q]);
        cum[i] = cum[i - 1] + acc;
    }
}

double SingularProfile::integral(double t) const {
    if (!(t > 0)) return 0.0;
    if (t <= u.front()) return g.front() * std::pow(t, 1 - theta) / (1 - theta);
    if (t >= u.back())
        return (cum.empty() ? 0.0 : cum.back()) +
               g.back() * (std::pow(t, 1 - theta) - std::pow(u.back(), 1 - theta)) / (1 - theta);
    if (cum.empty()) throw NumericalError("profile: integral before finalize()");
    double dl = std::log(u[1] / u[0]);
    std::size_t i = std::min<std::size_t>(std::size_t(std::log(t / u[0]) / dl), u.size() - 2);
    while (i > 0 && u[i] > t) --i;
    while (i + 1 < u.size() - 1 && u[i + 1] <= t) ++i;
    double acc = cum[i];
    Nodes nd = gauss_nodes(u[i], t);
    for (std::size_t q = 0; q < nd.x.size(); ++q) acc += nd.w[q] * (*this)(nd.x[q]);
    return acc;
}

PowerSamples::PowerSamples(std::vector<double> tt, std::vector<double> yy) : t(std::move(tt)), y(std::move(yy)) {
    if (t.size() < 3 || t.size() != y.size()) throw NumericalError("power fit needs at least three samples");
    for (double v : y)
        if (!(v > 0)) throw NumericalError("power fit needs positive samples");
    // least squares for log y = log c - theta log t on the three smallest nodes
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 3; ++i) {
        double lx = std::log(t[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    theta = -slope;
    c = std::exp((sy - slope * sx) / 3);
    if (!(theta < 1)) throw NumericalError("small-time power fit gives theta >= 1; the excursion tail would not be integrable");
}

double PowerSamples::operator()(double s) const {
    if (s <= t.front()) return c * std::pow(s, -theta);
    if (s >= t.back()) return y.back();
    std::size_t i = std::upper_bound(t.begin(), t.end(), s) - t.begin() - 1;
    double e = std::log(y[i + 1] / y[i]) / std::log(t[i + 1] / t[i]);
    return y[i] * std::pow(s / t[i], e);
}

std::vector<double> PowerSamples::cumulative() const {
    std::vector<double> out(t.size());
    double acc = c * std::pow(t[0], 1 - theta) / (1 - theta);
    out[0] = acc;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        double e = std::log(y[i + 1] / y[i]) / std::log(t[i + 1] / t[i]);
        // int_{t_i}^{t_{i+1}} y_i (s/t_i)^e ds
        double seg = std::abs(e + 1) < 1e-12 ? y[i] * t[i] * std::log(t[i + 1] / t[i])
                                             : y[i] * t[i] / (e + 1) * (std::pow(t[i + 1] / t[i], e + 1) - 1);
        acc += seg;
        out[i + 1] = acc;
    }
    return out;
}

double laplace_at_one(const SingularProfile& f) {
    double acc = f.g.front() * std::pow(f.u.front(), 1 - f.theta) / (1 - f.theta);
    for (std::size_t i = 1; i < f.u.size(); ++i) {
        Nodes nd = gauss_nodes(f.u[i - 1], f.u[i]);
        for (std::size_t q = 0; q < nd.x.size(); ++q) acc += nd.w[q] * std::exp(-nd.x[q]) * f(nd.x[q]);
    }
    return acc;
}

SingularProfile solve_scalar_mass(const Model& model, double d_star, const ProfileOptions& opt) {
    auto u = log_grid(opt);
    Interp P;
    P.u = u;
    P.y.resize(u.size());
    parallel_for(u.size(), [&](std::size_t i) { P.y[i] = model.positivity(u[i]); });
    double dl = std::log(u[1] / u[0]);
    SingularProfile m;
    m.u = u;
    if (d_star == 0) {
        m.theta = 1 - P.y[0];
    } else {
        P.slope0 = std::log(P.y[1] / P.y[0]) / dl;
        m.theta = 1 - P.slope0;
    }
    if (!(m.theta > 0 && m.theta < 1))
        throw NumericalError("scalar mass equation: small-time exponent outside (0,1): " + std::to_string(m.theta));
    const double th = m.theta;
    m.g = march(
        u, th, [&](double s) { return P(s); }, [&](std::size_t k) { return -std::pow(u[k], 1 - th); },
        [&](std::size_t k) { return -d_star * P.y[k]; }, d_star == 0);
    if (d_star == 0) {
        double L = laplace_at_one(m);
        for (auto& v : m.g) v /= L;
    }
    m.finalize();
    return m;
}

SingularProfile solve_dual_profile(const SingularProfile& m, double d_star, const ProfileOptions& opt) {
    SingularProfile n;
    n.u = log_grid(opt);
    n.theta = d_star == 0 ? 1 - m.theta : 0.0;
    const double th = n.theta;
    n.g = march(
        n.u, th, [&](double s) { return m(s); }, [&](std::size_t k) { return d_star * std::pow(n.u[k], -th); },
        [&](std::size_t) { return 1.0; }, false);
    n.finalize();
    return n;
}

}  // namespace lf
