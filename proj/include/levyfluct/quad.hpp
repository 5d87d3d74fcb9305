#pragma once

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace lf {

// Gauss-Legendre rule on [-1,1], full node set.
struct GaussRule {
    std::vector<double> x, w;
};

template <unsigned N>
GaussRule make_gauss() {
    using G = boost::math::quadrature::gauss<double, N>;
    auto a = G::abscissa();
    auto wt = G::weights();
    GaussRule r;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) {
            r.x.push_back(0);
            r.w.push_back(wt[i]);
        } else {
            r.x.push_back(-a[i]);
            r.w.push_back(wt[i]);
            r.x.push_back(a[i]);
            r.w.push_back(wt[i]);
        }
    }
    return r;
}

inline const GaussRule& gauss8() {
    static const GaussRule r = make_gauss<8>();
    return r;
}
inline const GaussRule& gauss16() {
    static const GaussRule r = make_gauss<16>();
    return r;
}
inline const GaussRule& gauss4() {
    static const GaussRule r = make_gauss<4>();
    return r;
}
inline const GaussRule& gauss6() {
    static const GaussRule r = make_gauss<6>();
    return r;
}

struct Nodes {
    std::vector<double> x, w;
    void add(const GaussRule& g, double a, double b) {
        double h = 0.5 * (b - a), c = 0.5 * (a + b);
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            x.push_back(c + h * g.x[i]);
            w.push_back(h * g.w[i]);
        }
    }
};

// Panels shrinking geometrically toward one end; `toward_a` picks the end.
inline Nodes graded_nodes(double a, double b, bool toward_a, int levels = 30, const GaussRule& g = gauss6()) {
    Nodes n;
    double L = b - a;
    double lo = 0;
    for (int k = levels; k >= 0; --k) {
        double hi = L * std::ldexp(1.0, -k);
        if (toward_a)
            n.add(g, a + lo, a + hi);
        else
            n.add(g, b - hi, b - lo);
        lo = hi;
    }
    return n;
}

inline Nodes gauss_nodes(double a, double b, const GaussRule& g = gauss8()) {
    Nodes n;
    n.add(g, a, b);
    return n;
}

}  // namespace lf
