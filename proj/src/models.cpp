#include "levyfluct/models.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levyfluct/quad.hpp"
#include "levyfluct/specfun.hpp"

namespace lf {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double gauss_pdf(double w, double var) { return kInvSqrt2Pi / std::sqrt(var) * std::exp(-w * w / (2 * var)); }

// moments of N(mu, var) restricted to [a,b]
Moments gaussian_moments(double mu, double var, double a, double b) {
    double sd = std::sqrt(var);
    double za = (a - mu) / sd, zb = (b - mu) / sd;
    double m0 = (za > 0) ? norm_sf(za) - norm_sf(zb) : norm_cdf(zb) - norm_cdf(za);
    double pa = std::isfinite(za) ? kInvSqrt2Pi * std::exp(-0.5 * za * za) : 0.0;
    double pb = std::isfinite(zb) ? kInvSqrt2Pi * std::exp(-0.5 * zb * zb) : 0.0;
    double zpa = std::isfinite(za) ? za * pa : 0.0, zpb = std::isfinite(zb) ? zb * pb : 0.0;
    Moments r;
    r.m0 = m0;
    r.m1 = mu * m0 + sd * (pa - pb);
    r.m2 = (mu * mu + var) * m0 + 2 * mu * sd * (pa - pb) + var * (zpa - zpb);
    return r;
}

// antiderivatives in v of v^{-1/2} e^{-c/v} and v^{1/2} e^{-c/v}
double lev_F(double c, double v) {
    return 2 * std::sqrt(v) * std::exp(-c / v) - 2 * std::sqrt(M_PI * c) * std::erfc(std::sqrt(c / v));
}
double lev_G(double c, double v) { return 2.0 / 3 * v * std::sqrt(v) * std::exp(-c / v) - 2 * c / 3 * lev_F(c, v); }

// sub_bm, alpha = 1: p_s(w) dw = (1/pi) e^{aw} (a r K1(a r)) dtheta with w = s tan(theta)
double bessel_weight(double a, double s, double w) {
    double r = std::hypot(w, s);
    double ar = a * r;
    return std::exp(a * (w - r)) * ar * bessel_k_scaled(1, ar) / M_PI;
}

}  // namespace

double norm_cdf(double z) { return 0.5 * std::erfc(-z / M_SQRT2); }
double norm_sf(double z) { return 0.5 * std::erfc(z / M_SQRT2); }

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    if (spec_.kind != ModelKind::BrownianMotion) {
        // integrability of nu away from the origin
        double acc = 0;
        const auto& g = gauss16();
        for (double sgn : {1.0, -1.0}) {
            for (int pnl = 0; pnl < 30; ++pnl) {
                double a = std::ldexp(1.0, pnl), b = 2 * a;
                for (std::size_t q = 0; q < g.x.size(); ++q) {
                    double x = 0.5 * (a + b) + 0.5 * (b - a) * g.x[q];
                    acc += 0.5 * (b - a) * g.w[q] * levy_density(sgn * x);
                }
            }
        }
        if (!std::isfinite(acc)) throw InvariantError("Levy density not integrable on |x| > 1");
    }
}

ModelCapabilities Model::capabilities() const {
    ModelCapabilities c;
    switch (spec_.kind) {
        case ModelKind::BrownianMotion: c = {true, true, true, true}; break;
        case ModelKind::SymmetricStable: c = {spec_.alpha == 1.0, false, true, true}; break;
        case ModelKind::SubordinatedDriftBM: c = {spec_.alpha == 1.0, false, false, true}; break;
        case ModelKind::SubordinatorMinusDrift: c = {spec_.alpha == 1.0, false, false, false}; break;
    }
    return c;
}

bool Model::closed_kernel() const { return spec_.kind == ModelKind::BrownianMotion || spec_.alpha == 1.0; }

double Model::p(double t, double x) const {
    if (!(t > 0)) throw NumericalError("p: t must be > 0");
    const double al = spec_.alpha, a = spec_.a, be = spec_.beta();
    switch (spec_.kind) {
        case ModelKind::BrownianMotion: return gauss_pdf(x, t);
        case ModelKind::SymmetricStable:
            if (al == 1.0) return t / (M_PI * (t * t + x * x));
            return symmetric_stable_density(al, t, x);
        case ModelKind::SubordinatedDriftBM:
            if (al == 1.0) {
                double r = std::hypot(x, t);
                return a * t * std::exp(a * (x - r)) / M_PI * bessel_k_scaled(1, a * r) / r;
            }
            return subordinate(be, t, [&](double v) { return gauss_pdf(x - a * v, v); });
        case ModelKind::SubordinatorMinusDrift: {
            double u = x + a * t;
            if (!(u > 0)) return 0.0;
            if (al == 1.0) return t * kInvSqrt2Pi * std::pow(u, -1.5) * std::exp(-t * t / (2 * u));
            return positive_stable_density(be, t, u);
        }
    }
    return 0;
}

double Model::levy_density(double x) const {
    if (x == 0) throw NumericalError("levy_density: x must be nonzero");
    const double al = spec_.alpha, a = spec_.a, be = spec_.beta();
    switch (spec_.kind) {
        case ModelKind::BrownianMotion: throw NumericalError("brownian motion has no Levy density");
        case ModelKind::SymmetricStable:
            return std::tgamma((1 + al) / 2) * std::pow(2.0, (al - 1) / 2) / M_PI * std::pow(std::abs(x), -1 - al);
        case ModelKind::SubordinatedDriftBM: {
            double ax = std::abs(x);
            return std::exp(a * (x - ax)) * std::pow(a / ax, 0.5 + be) * bessel_k_scaled(0.5 + be, a * ax) / M_PI;
        }
        case ModelKind::SubordinatorMinusDrift:
            return x > 0 ? kInvSqrt2Pi * std::pow(x, -1 - be) : 0.0;
    }
    return 0;
}

double Model::positivity(double t) const {
    if (!(t > 0)) throw NumericalError("positivity: t must be > 0");
    switch (spec_.kind) {
        case ModelKind::BrownianMotion:
        case ModelKind::SymmetricStable: return 0.5;
        default: return sf(t, 0.0);
    }
}

double Model::h_star(double x) const {
    if (!capabilities().has_h_star) throw NumericalError(std::string(kind_name(spec_.kind)) + " has no renewal function");
    if (!(x > 0)) throw NumericalError("h_star: x must be > 0");
    if (spec_.kind == ModelKind::BrownianMotion) return x;
    return std::pow(x, spec_.alpha / 2);
}

double Model::sf(double s, double y) const {
    if (!(s > 0)) throw NumericalError("sf: s must be > 0");
    if (y < 0) throw NumericalError("sf: y must be >= 0");
    const double al = spec_.alpha, a = spec_.a, be = spec_.beta();
    switch (spec_.kind) {
        case ModelKind::BrownianMotion: return norm_sf(y / std::sqrt(s));
        case ModelKind::SymmetricStable:
            if (al == 1.0) return y == 0 ? 0.5 : std::atan(s / y) / M_PI;
            return subordinate(be, s, [&](double v) { return norm_sf(y / std::sqrt(v)); });
        case ModelKind::SubordinatedDriftBM: {
            if (al != 1.0) return subordinate(be, s, [&](double v) { return norm_sf((y - a * v) / std::sqrt(v)); });
            // theta = pi/2 - psi^2 removes the (pi/2 - theta)^{-1/2} endpoint behaviour
            double top = std::sqrt(y == 0 ? M_PI / 2 : std::atan(s / y));
            const auto& g = gauss16();
            double acc = 0;
            const int panels = 4;
            for (int pnl = 0; pnl < panels; ++pnl) {
                double lo = top * pnl / panels, hi = top * (pnl + 1) / panels;
                for (std::size_t q = 0; q < g.x.size(); ++q) {
                    double psi = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g.x[q];
                    double phi = psi * psi;
                    double w = s / std::tan(phi);
                    acc += 0.5 * (hi - lo) * g.w[q] * 2 * psi * bessel_weight(a, s, w);
                }
            }
            return acc;
        }
        case ModelKind::SubordinatorMinusDrift:
            if (al == 1.0) return std::erf(s / std::sqrt(2 * (y + a * s)));
            return positive_stable_sf(be, s, y + a * s);
    }
    return 0;
}

Moments Model::partial_moments(double s, double lo, double hi) const {
    if (!(s > 0)) throw NumericalError("partial_moments: s must be > 0");
    if (!(lo >= 0 && hi > lo)) throw NumericalError("partial_moments: need 0 <= a < b");
    const double al = spec_.alpha, a = spec_.a, be = spec_.beta();
    switch (spec_.kind) {
        case ModelKind::BrownianMotion: return gaussian_moments(0, s, lo, hi);
        case ModelKind::SymmetricStable:
            if (al == 1.0) {
                Moments r;
                r.m0 = (std::atan(hi / s) - std::atan(lo / s)) / M_PI;
                r.m1 = s / (2 * M_PI) * std::log1p((hi * hi - lo * lo) / (s * s + lo * lo));
                // int w^2 p = (s/pi)(b-a) - s^2 m0
                r.m2 = s / M_PI * (hi - lo) - s * s * r.m0;
                if (s > 0.5 * hi) {
                    // the difference above cancels when s >> b
                    const auto& g = gauss8();
                    double acc = 0;
                    for (std::size_t q = 0; q < g.x.size(); ++q) {
                        double w = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g.x[q];
                        acc += 0.5 * (hi - lo) * g.w[q] * w * w * s / (M_PI * (s * s + w * w));
                    }
                    r.m2 = acc;
                }
                return r;
            }
            break;
        case ModelKind::SubordinatedDriftBM:
            if (al == 1.0) {
                Moments r;
                // theta = atan(w/s) below s, log w above it in panels of ratio 2
                double c = lo;
                while (c < hi) {
                    double d = std::min(hi, c < s ? s : 2 * c);
                    bool polar = c < s;
                    const auto& g = !polar && d <= 1.25 * c ? gauss4() : gauss8();
                    double t0 = polar ? std::atan(c / s) : std::log(c);
                    double t1 = polar ? std::atan(d / s) : std::log(d);
                    for (std::size_t q = 0; q < g.x.size(); ++q) {
                        double th = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * g.x[q];
                        double w, f;
                        if (polar) {
                            w = s * std::tan(th);
                            f = bessel_weight(a, s, w);
                        } else {
                            w = std::exp(th);
                            f = p(s, w) * w;
                        }
                        f *= 0.5 * (t1 - t0) * g.w[q];
                        r.m0 += f;
                        r.m1 += f * w;
                        r.m2 += f * w * w;
                    }
                    c = d;
                }
                return r;
            }
            break;
        case ModelKind::SubordinatorMinusDrift:
            if (al == 1.0) {
                double as = a * s, A = lo + as, B = hi + as, c = s * s / 2;
                double k = s * kInvSqrt2Pi;
                double J0 = std::erf(s / std::sqrt(2 * A)) - std::erf(s / std::sqrt(2 * B));
                double J1 = k * (lev_F(c, B) - lev_F(c, A));
                double J2 = k * (lev_G(c, B) - lev_G(c, A));
                Moments r;
                r.m0 = J0;
                r.m1 = J1 - as * J0;
                r.m2 = J2 - 2 * as * J1 + as * as * J0;
                if (r.m2 < 0 || r.m1 < 0) {
                    // cancellation for a cell deep inside the drift; fall through to quadrature
                    break;
                }
                return r;
            }
            break;
    }
    // generic: nested quadrature
    Moments r;
    if (spec_.kind == ModelKind::SymmetricStable) {
        return {subordinate(be, s, [&](double v) { return gaussian_moments(0, v, lo, hi).m0; }),
                subordinate(be, s, [&](double v) { return gaussian_moments(0, v, lo, hi).m1; }),
                subordinate(be, s, [&](double v) { return gaussian_moments(0, v, lo, hi).m2; })};
    }
    if (spec_.kind == ModelKind::SubordinatedDriftBM) {
        return {subordinate(be, s, [&](double v) { return gaussian_moments(a * v, v, lo, hi).m0; }),
                subordinate(be, s, [&](double v) { return gaussian_moments(a * v, v, lo, hi).m1; }),
                subordinate(be, s, [&](double v) { return gaussian_moments(a * v, v, lo, hi).m2; })};
    }
    using boost::math::quadrature::gauss_kronrod;
    for (int k = 0; k < 3; ++k) {
        double err;
        double v = gauss_kronrod<double, 31>::integrate([&](double w) { return std::pow(w, k) * p(s, w); }, lo, hi,
                                                        10, 1e-10, &err);
        (k == 0 ? r.m0 : k == 1 ? r.m1 : r.m2) = v;
    }
    return r;
}

RegularityProfile regularity_profile(const ModelSpec& m) {
    return {m.regular_up, m.regular_down, m.d, m.d_star};
}

ModelSpec parse_model(const std::map<std::string, std::string>& kv) {
    auto get = [&](const std::string& k) -> std::optional<double> {
        auto it = kv.find(k);
        if (it == kv.end()) return std::nullopt;
        try {
            std::size_t pos;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + k + "': not a number: '" + it->second + "'");
        }
    };
    auto it = kv.find("model");
    if (it == kv.end()) throw ConfigError("missing key 'model'");
    ModelKind kind = kind_from_name(it->second);
    auto alpha = get("alpha"), a = get("a"), ds = get("d_star");
    if (ds && *ds != 0 && kind != ModelKind::SubordinatorMinusDrift)
        throw ConfigError("[model]: " + it->second + " is regular upward, d_star must be 0 or absent");
    switch (kind) {
        case ModelKind::BrownianMotion: return ModelSpec::make(kind, 2.0, 0.0, 0.0);
        case ModelKind::SymmetricStable:
            if (!alpha) throw ConfigError("missing key 'alpha' for sym_stable");
            return ModelSpec::make(kind, *alpha, 0.0, 0.0);
        case ModelKind::SubordinatedDriftBM:
            if (!a) throw ConfigError("missing key 'a' for sub_bm");
            return ModelSpec::make(kind, alpha.value_or(1.0), *a, 0.0);
        case ModelKind::SubordinatorMinusDrift:
            if (!a) throw ConfigError("missing key 'a' for sub_drift");
            return ModelSpec::make(kind, alpha.value_or(1.0), *a, ds);
    }
    throw ConfigError("unreachable");
}

}  // namespace lf
