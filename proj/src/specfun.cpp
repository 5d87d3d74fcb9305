#include "levyfluct/specfun.hpp"

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "levyfluct/quad.hpp"

namespace lf {

void SeriesEvalPolicy::validate() const {
    if (max_terms < 10) throw ConfigError("series policy: max_terms must be >= 10");
    if (!(rel_tol > 0 && rel_tol < 1) || !(abs_tol > 0 && abs_tol < 1))
        throw ConfigError("series policy: tolerances must lie in (0,1)");
}

double gamma_fn(double z) {
    if (!(z > 0)) throw NumericalError("gamma_fn: argument must be > 0");
    return std::tgamma(z);
}

double bessel_k(double nu, double z) {
    if (!(z > 0)) throw NumericalError("bessel_k: argument must be > 0");
    if (nu < 0) nu = -nu;
    // integer orders 0 and 1 have direct rational approximations
    if (nu == 1) return boost::math::detail::bessel_k1(z);
    if (nu == 0) return boost::math::detail::bessel_k0(z);
    return boost::math::cyl_bessel_k(nu, z);
}

double bessel_k_scaled(double nu, double z) {
    if (z < 500) return std::exp(z) * bessel_k(nu, z);
    // large-argument expansion
    double mu = 4 * nu * nu, term = 1, sum = 1;
    for (int k = 1; k < 30; ++k) {
        term *= (mu - (2 * k - 1) * (2 * k - 1)) / (k * 8 * z);
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::sqrt(M_PI / (2 * z)) * sum;
}

namespace {

// Neumaier summation in long double
struct CompSum {
    long double s = 0, c = 0;
    void add(long double v) {
        long double t = s + v;
        if (std::fabs(s) >= std::fabs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    long double value() const { return s + c; }
};

// (1/pi) sum (-1)^{n-1} Gamma(n b + 1 - k) sin(pi n b) / (n! u^{1 - k + n b}); k=0 density, k=1 survival
SeriesValue alt_series(double beta, double u, int k, const SeriesEvalPolicy& pol) {
    if (!(u > 0)) throw NumericalError("stable series: u must be > 0");
    CompSum sum;
    long double abs_sum = 0;
    const long double lu = std::log((long double)u);
    int below = 0;
    int n = 1;
    for (; n <= pol.max_terms; ++n) {
        long double nb = (long double)n * beta;
        long double lmag = std::lgamma(nb + 1 - k) - std::lgamma((long double)n + 1) - (1 - k + nb) * lu;
        long double mag = std::exp(lmag);
        long double term = mag * std::sin(M_PIl * std::fmod(nb, 2.0L));
        if (n % 2 == 0) term = -term;
        sum.add(term);
        abs_sum += std::fabs(term);
        long double cur = std::fabs(sum.value());
        // magnitude bound, not the term itself: sin(pi n b) vanishes for some n
        if (mag < pol.abs_tol + pol.rel_tol * cur) {
            if (++below >= 2) break;
        } else {
            below = 0;
        }
    }
    double v = double(sum.value() / M_PIl);
    if (n > pol.max_terms)
        throw SeriesConvergenceError("stable series did not converge", v, pol.max_terms);
    double canc = v != 0 ? double(abs_sum / M_PIl) / std::abs(v) : INFINITY;
    return {v, canc, n};
}

double kanter_A(double beta, double phi) {
    double num = std::pow(std::sin(beta * phi), beta) * std::pow(std::sin((1 - beta) * phi), 1 - beta);
    return std::pow(num / std::sin(phi), 1 / (1 - beta));
}

template <class F>
double integrate_0_pi(F f) {
    using boost::math::quadrature::gauss_kronrod;
    double err;
    return gauss_kronrod<double, 31>::integrate(f, 0.0, M_PI, 15, 1e-13, &err);
}

std::mutex cache_mu;
std::map<std::pair<double, double>, double> crossover_cache;

}  // namespace

SeriesValue zolotarev_series(double beta, double u, const SeriesEvalPolicy& pol) {
    if (!(beta > 0 && beta < 1)) throw NumericalError("stable index must lie in (0,1)");
    return alt_series(beta, u, 0, pol);
}

double series_crossover(double beta, const SeriesEvalPolicy& pol) {
    auto key = std::make_pair(beta, pol.max_cancellation);
    {
        std::lock_guard<std::mutex> g(cache_mu);
        auto it = crossover_cache.find(key);
        if (it != crossover_cache.end()) return it->second;
    }
    auto ok = [&](double u) {
        try {
            auto r = alt_series(beta, u, 0, pol);
            return r.value > 0 && r.cancellation <= pol.max_cancellation;
        } catch (const SeriesConvergenceError&) {
            return false;
        }
    };
    double lo = -8, hi = 8;  // log10 u
    if (!ok(std::pow(10.0, hi))) throw NumericalError("series_crossover: series unusable");
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        (ok(std::pow(10.0, mid)) ? hi : lo) = mid;
    }
    double u = std::pow(10.0, hi);
    std::lock_guard<std::mutex> g(cache_mu);
    crossover_cache[key] = u;
    return u;
}

double kanter_density(double beta, double u) {
    if (!(u > 0)) throw NumericalError("kanter_density: u must be > 0");
    double c = std::pow(u, -beta / (1 - beta));
    double I = integrate_0_pi([&](double phi) {
        if (phi <= 0 || phi >= M_PI) return 0.0;
        double A = kanter_A(beta, phi);
        return A * std::exp(-A * c);
    });
    return beta / (1 - beta) * std::pow(u, -1 / (1 - beta)) * I / M_PI;
}

double stable1_density(double beta, double u, const SeriesEvalPolicy& pol) {
    if (!(u > 0)) return 0.0;
    if (u >= series_crossover(beta, pol)) return alt_series(beta, u, 0, pol).value;
    return kanter_density(beta, u);
}

double stable1_cdf(double beta, double u) {
    if (!(u > 0)) return 0.0;
    SeriesEvalPolicy pol;
    if (u >= series_crossover(beta, pol)) return 1 - alt_series(beta, u, 1, pol).value;
    double c = std::pow(u, -beta / (1 - beta));
    return integrate_0_pi([&](double phi) {
               if (phi <= 0 || phi >= M_PI) return 0.0;
               return std::exp(-kanter_A(beta, phi) * c);
           }) /
           M_PI;
}

double stable1_sf(double beta, double u) {
    if (!(u > 0)) return 1.0;
    SeriesEvalPolicy pol;
    if (u >= series_crossover(beta, pol)) return alt_series(beta, u, 1, pol).value;
    return 1 - stable1_cdf(beta, u);
}

double subordinator_scale(double beta) {
    return std::tgamma(1 - beta) / (beta * std::sqrt(2 * M_PI));
}

double positive_stable_density(double beta, double t, double u) {
    if (!(t > 0)) throw NumericalError("positive_stable_density: t must be > 0");
    if (!(u > 0)) return 0.0;
    double s = std::pow(subordinator_scale(beta) * t, 1 / beta);
    return stable1_density(beta, u / s) / s;
}

double positive_stable_sf(double beta, double t, double u) {
    if (!(u > 0)) return 1.0;
    double s = std::pow(subordinator_scale(beta) * t, 1 / beta);
    return stable1_sf(beta, u / s);
}

namespace {

// eta_1 on quarter-decade panels in log v, 16 Gauss nodes each, far into the power-law tail
struct Eta1Table {
    static constexpr int per_decade = 4;
    static constexpr int nodes = 16;
    int lo = 0;
    std::vector<double> v, w;  // node v and weight * v * eta1(v) * dlogv
};

const Eta1Table& eta1_table(double beta) {
    static std::mutex mu;
    static std::map<double, std::unique_ptr<Eta1Table>> tables;
    std::lock_guard<std::mutex> g(mu);
    auto& slot = tables[beta];
    if (slot) return *slot;
    auto tab = std::make_unique<Eta1Table>();
    const auto& G = gauss16();
    const double step = std::log(10.0) / Eta1Table::per_decade;
    auto vf = [&](double v) { return v * stable1_density(beta, v); };
    double peak = 0;
    for (int i = -16; i <= 16; ++i) peak = std::max(peak, vf(std::exp(i * step)));
    int lo = 0;
    while (vf(std::exp(lo * step)) > 1e-40 * peak) --lo;
    const int hi = 60 * Eta1Table::per_decade;
    for (int i = lo; i < hi; ++i) {
        double a = i * step, b = (i + 1) * step;
        for (std::size_t q = 0; q < G.x.size(); ++q) {
            double v = std::exp(0.5 * (a + b) + 0.5 * (b - a) * G.x[q]);
            tab->v.push_back(v);
            tab->w.push_back(0.5 * (b - a) * G.w[q] * vf(v));
        }
    }
    tab->lo = lo;
    slot = std::move(tab);
    return *slot;
}

}  // namespace

double subordinate(double beta, double t, const std::function<double(double)>& g) {
    if (!(t > 0)) throw NumericalError("subordinate: t must be > 0");
    const auto& tab = eta1_table(beta);
    const double S = std::pow(subordinator_scale(beta) * t, 1 / beta);
    const int P = Eta1Table::nodes;
    const std::size_t npan = tab.v.size() / P;
    CompSum sum;
    double peak = 0, first_max = 0;
    std::vector<double> pmax;
    for (std::size_t pnl = 0; pnl < npan; ++pnl) {
        double mx = 0;
        for (int q = 0; q < P; ++q) {
            std::size_t i = pnl * P + q;
            double val = tab.w[i] * g(S * tab.v[i]);
            if (!std::isfinite(val)) throw NumericalError("subordinate: non-finite integrand");
            sum.add(val);
            mx = std::max(mx, std::abs(val));
        }
        if (pnl == 0) first_max = mx;
        peak = std::max(peak, mx);
        pmax.push_back(mx);
        if (pnl >= 4 && peak > 0 && mx < 1e-12 * peak) {
            // power-law remainder from the log-slope over the last two panels
            double a = pmax[pnl - 1], b = mx;
            if (a > 0 && b > 0 && b < a) {
                double step = std::log(10.0) / Eta1Table::per_decade;
                double gam = std::log(a / b) / step;
                double vend = std::exp((tab.lo + double(pnl) + 1) * step);
                double iv = vend * stable1_density(beta, vend) * g(S * vend);
                sum.add(iv / gam);
            }
            if (first_max > 1e-14 * peak) throw NumericalError("subordinate: integrand not negligible at the left end");
            return double(sum.value());
        }
        if (peak == 0 && pnl > 8 * Eta1Table::per_decade) return 0.0;
    }
    throw NumericalError("subordinate: integrand not negligible at the right end of the table");
}

double symmetric_stable_density(double alpha, double t, double x) {
    if (!(t > 0)) throw NumericalError("symmetric_stable_density: t must be > 0");
    if (!(alpha > 0 && alpha <= 2)) throw NumericalError("symmetric_stable_density: alpha in (0,2]");
    if (alpha == 2) return std::exp(-x * x / (2 * t)) / std::sqrt(2 * M_PI * t);
    return subordinate(alpha / 2, t, [x](double s) { return std::exp(-x * x / (2 * s)) / std::sqrt(2 * M_PI * s); });
}

}  // namespace lf
