#include "levyfluct/entrance_law.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "levyfluct/parallel.hpp"
#include "levyfluct/quad.hpp"

namespace lf {

namespace {

// Kernel data for one time lag s on the internal z grid. K_s(w) = w p_s(w)/s drives the
// x-weighted identity, P the plain one. R/F are hat weights for the rising/falling halves.
struct Slice {
    std::vector<double> RK, FK, RP, FP, vK, vP, cdf;
    double fbX = 0, fb0 = 0;
};

struct SliceSpec {
    bool P = false;      // plain kernel weights
    bool tail = false;   // tail-closure data
    bool half = false;   // shifted by h/2 (residual evaluation at midpoints)
};

Slice make_slice(const Model& model, double s, double h, int M, SliceSpec sp) {
    Slice r;
    const int C = M + 2;
    std::vector<Moments> mo(C);
    // cell c: [c h, (c+1) h], or [(c - 1/2) h, (c + 1/2) h] clipped at 0 when shifted
    auto lo = [&](int c) { return sp.half ? std::max(0.0, (c - 0.5) * h) : c * h; };
    auto hi = [&](int c) { return sp.half ? (c + 0.5) * h : (c + 1) * h; };
    for (int c = 0; c < C; ++c) mo[c] = model.partial_moments(s, lo(c), hi(c));
    r.RK.assign(C, 0.0);
    r.FK.assign(C, 0.0);
    if (sp.P) {
        r.RP.assign(C, 0.0);
        r.FP.assign(C, 0.0);
    }
    if (!sp.half) {
        // R_d on [dh,(d+1)h] weight ((d+1)h - w)/h ; F_d on [(d-1)h, dh] weight (w - (d-1)h)/h
        for (int d = 0; d <= M; ++d) {
            r.RK[d] = ((d + 1) * h * mo[d].m1 - mo[d].m2) / (h * s);
            if (d >= 1) r.FK[d] = (mo[d - 1].m2 - (d - 1) * h * mo[d - 1].m1) / (h * s);
            if (sp.P) {
                r.RP[d] = ((d + 1) * h * mo[d].m0 - mo[d].m1) / h;
                if (d >= 1) r.FP[d] = (mo[d - 1].m1 - (d - 1) * h * mo[d - 1].m0) / h;
            }
        }
    } else {
        // Rh[d+1] for d = -1..M on shifted cell d+1, weight ((d+3/2)h - w)/h ; Fh[d] on shifted cell d, weight (w - (d-1/2)h)/h
        for (int d = -1; d <= M; ++d) {
            const Moments& m = mo[d + 1];
            double e = (d + 1.5) * h;
            r.RK[d + 1] = (e * m.m1 - m.m2) / (h * s);
            if (sp.P) r.RP[d + 1] = (e * m.m0 - m.m1) / h;
        }
        for (int d = 0; d <= M; ++d) {
            const Moments& m = mo[d];
            double e = (d - 0.5) * h;
            r.FK[d] = (m.m2 - e * m.m1) / (h * s);
            if (sp.P) r.FP[d] = (m.m1 - e * m.m0) / h;
        }
    }
    r.vK.resize(M + 1);
    if (sp.P) r.vP.resize(M + 1);
    for (int j = 0; j <= M; ++j) {
        double x = (j + (sp.half ? 0.5 : 0.0)) * h;
        double p = model.p(s, x);
        r.vK[j] = x * p / s;
        if (sp.P) r.vP[j] = p;
    }
    if (sp.tail) {
        const double X = M * h;
        std::vector<double> fb(M + 1);
        fb[M] = model.sf(s, X);
        for (int j = M - 1; j >= 0; --j) fb[j] = fb[j + 1] + mo[j].m0;
        r.fbX = fb[M];
        r.fb0 = fb[0];
        // int hat_j(z) Fbar(X - z) dz, built on y = X - z
        std::vector<double> v(M + 1, 0.0);
        for (int c = 0; c < M; ++c) {
            double a = c * h, b = a + h;
            double G0 = b * fb[c + 1] - a * fb[c] + mo[c].m1;
            double G1 = 0.5 * (b * b * fb[c + 1] - a * a * fb[c]) + 0.5 * mo[c].m2;
            v[c] += ((c + 1) * h * G0 - G1) / h;
            v[c + 1] += (G1 - c * h * G0) / h;
        }
        r.cdf.assign(v.rbegin(), v.rend());
    }
    return r;
}

// accumulators for one end of a time cell
struct EndWeights {
    std::vector<double> RK, FK, RP, FP, vK, vP, cdf;
    double fbX = 0, fb0 = 0;
    void init(int n, SliceSpec sp) {
        RK.assign(n + 1, 0.0);
        FK.assign(n + 1, 0.0);
        vK.assign(n, 0.0);
        if (sp.P) {
            RP.assign(n + 1, 0.0);
            FP.assign(n + 1, 0.0);
            vP.assign(n, 0.0);
        }
        if (sp.tail) cdf.assign(n, 0.0);
    }
    void add(const Slice& s, double w) {
        auto ax = [w](std::vector<double>& a, const std::vector<double>& b) {
            for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) a[i] += w * b[i];
        };
        ax(RK, s.RK);
        ax(FK, s.FK);
        ax(RP, s.RP);
        ax(FP, s.FP);
        ax(vK, s.vK);
        ax(vP, s.vP);
        ax(cdf, s.cdf);
        fbX += w * s.fbX;
        fb0 += w * s.fb0;
    }
};

// out_j = sum_{l>=1} R[j-l] Q_l + sum_{l>=0} F[j-l] Q_l on nodes, out_0 = 0
void conv_nodes(const std::vector<double>& R, const std::vector<double>& F, const std::vector<double>& Q, double c,
                std::vector<double>& out) {
    const int M = int(Q.size()) - 1;
    for (int j = 1; j <= M; ++j) {
        double acc = F[j] * Q[0];
        for (int l = 1; l <= j; ++l) acc += (R[j - l] + F[j - l]) * Q[l];
        out[j] += c * acc;
    }
}

// midpoints x = (j + 1/2) h, j = 0..M-1
void conv_mid(const std::vector<double>& Rh, const std::vector<double>& Fh, const std::vector<double>& Q, double c,
              std::vector<double>& out) {
    const int M = int(Q.size()) - 1;
    for (int j = 0; j < M; ++j) {
        double acc = 0;
        for (int l = 1; l <= j + 1; ++l) acc += Rh[j - l + 1] * Q[l];
        for (int l = 0; l <= j; ++l) acc += Fh[j - l] * Q[l];
        out[j] += c * acc;
    }
}

struct CellRule {
    Nodes nd;
    double ta, tb;
};

CellRule cell_rule(const std::vector<double>& t, std::size_t i, std::size_t k, int diag_levels) {
    CellRule c;
    c.ta = i == 0 ? 0.0 : t[i - 1];
    c.tb = t[i];
    if (i == k)
        c.nd = graded_nodes(c.ta, c.tb, false, diag_levels);
    else  // far from the diagonal the lag varies slowly across the cell
        c.nd = gauss_nodes(c.ta, c.tb, t[k] - c.tb >= 2 * (c.tb - c.ta) ? gauss4() : gauss8());
    return c;
}

// nodes on (0, t) graded toward both ends
Nodes both_ends(double t, int levels = 40) {
    Nodes a = graded_nodes(0, t / 2, true, levels), b = graded_nodes(t / 2, t, false, levels);
    a.x.insert(a.x.end(), b.x.begin(), b.x.end());
    a.w.insert(a.w.end(), b.w.begin(), b.w.end());
    return a;
}

// x with P(X_t > x) = P(X_t > 0) / 2
double half_spread(const Model& model, double t) {
    const double target = 0.5 * model.sf(t, 0);
    double lo = 0, hi = 1e-6;
    while (model.sf(t, hi) > target && hi < 1e6) {
        lo = hi;
        hi *= 4;
    }
    for (int it = 0; it < 60 && hi - lo > 1e-3 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (model.sf(t, mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

QStarSolution solve_qstar(const Model& model, const TimeGrid& tg, const SpaceGrid& xg, const SolverOptions& opt) {
    if (opt.space_intervals < 8) throw ConfigError("solver: space_intervals must be >= 8");
    if (opt.time_refine < 1) throw ConfigError("solver: time_refine must be >= 1");
    if (xg.x.front() < 0) throw ConfigError("solver: space grid must lie in [0, inf)");
    const double dstar = model.spec().dstar_or_throw();
    QStarSolution sol;
    sol.d_star = dstar;
    sol.m_profile = solve_scalar_mass(model, dstar, opt.profile);
    const auto& mprof = sol.m_profile;

    InternalField& F = sol.in;
    const int n_user = int(tg.size());
    F.M = opt.space_intervals;
    F.h = xg.x.back() / F.M;
    F.tg = build_time_grid(tg.T, n_user * opt.time_refine, tg.gamma);
    {
        // start well below grid resolution and cross into the resolved range in small geometric steps
        const std::vector<double> base = F.tg.t;
        std::vector<double> tt;
        for (double s = base.front(); half_spread(model, s) > opt.start_cells * F.h && s > 1e-14; s /= 2)
            tt.push_back(s / 2);
        std::reverse(tt.begin(), tt.end());
        std::vector<bool> is_base(tt.size(), false);
        for (double b : base) {
            double prev = tt.empty() ? 0.0 : tt.back();
            if (prev > 0 && b / prev > 1.5 && half_spread(model, prev) < opt.transition_cells * F.h) {
                int extra = int(std::ceil(std::log(b / prev) / std::log(1.5))) - 1;
                for (int e = 1; e <= extra; ++e) {
                    tt.push_back(prev * std::pow(b / prev, double(e) / (extra + 1)));
                    is_base.push_back(false);
                }
            }
            tt.push_back(b);
            is_base.push_back(true);
        }
        F.tg.t = tt;
        std::vector<std::size_t> base_index;
        for (std::size_t i = 0; i < tt.size(); ++i)
            if (is_base[i]) base_index.push_back(i);
        for (int k = 0; k < n_user; ++k) F.user_index.push_back(base_index[(k + 1) * opt.time_refine - 1]);
    }
    const int M = F.M;
    const double h = F.h, X = F.X();
    const auto& t = F.tg.t;
    const std::size_t N = t.size();
    F.Q.assign(N, std::vector<double>(M + 1, 0.0));
    F.S.assign(N, 0.0);
    F.T.assign(N, 0.0);
    F.b.assign(N, 0.0);
    std::vector<double> mw(M + 1, h);
    mw[0] = mw[M] = h / 2;

    SliceSpec sp{false, true, false};
    const double N0 = dstar + mprof.integral(t[0]);
    if (!(N0 > 0)) throw NumericalError("solver: vanishing excursion mass at the first node");
    for (std::size_t k = 0; k < N; ++k) {
        const double tk = t[k];
        // delta_0 part through m(u), and the d* term
        std::vector<double> rhs(M + 1, 0.0);
        double H = 0;
        {
            Nodes nd = both_ends(tk);
            std::vector<std::vector<double>> part(nd.x.size());
            std::vector<double> hp(nd.x.size());
            parallel_for(nd.x.size(), [&](std::size_t q) {
                double u = nd.x[q], s = tk - u, mu = mprof(u);
                part[q].resize(M + 1);
                for (int j = 1; j <= M; ++j) part[q][j] = nd.w[q] * mu * j * h * model.p(s, j * h) / s;
                hp[q] = nd.w[q] * mu * model.sf(s, X);
            });
            for (std::size_t q = 0; q < nd.x.size(); ++q) {
                for (int j = 0; j <= M; ++j) rhs[j] += part[q][j];
                H += hp[q];
            }
            if (dstar > 0) {
                for (int j = 1; j <= M; ++j) rhs[j] += dstar * j * h * model.p(tk, j * h) / tk;
                H += dstar * model.sf(tk, X);
            }
        }
        // history cells
        std::vector<std::vector<double>> contrib(k + 1);
        std::vector<double> Hc(k + 1, 0.0);
        EndWeights diag;
        parallel_for(k + 1, [&](std::size_t i) {
            CellRule c = cell_rule(t, i, k, opt.diag_levels);
            EndWeights ea, eb;
            ea.init(M + 1, sp);
            eb.init(M + 1, sp);
            for (std::size_t q = 0; q < c.nd.x.size(); ++q) {
                double u = c.nd.x[q];
                Slice sl = make_slice(model, tk - u, h, M, sp);
                // below the first node the resolved part is the jump part, which grows like d* + N*(u)
                double phb = i == 0 ? (dstar + mprof.integral(u)) / N0 : (u - c.ta) / (c.tb - c.ta);
                if (i > 0) ea.add(sl, c.nd.w[q] * (1 - phb));
                eb.add(sl, c.nd.w[q] * phb);
            }
            auto& out = contrib[i];
            out.assign(M + 1, 0.0);
            double hs = 0;
            auto apply = [&](const EndWeights& e, std::size_t node) {
                conv_nodes(e.RK, e.FK, F.Q[node], 1.0, out);
                for (int j = 1; j <= M; ++j) out[j] -= e.vK[j] * F.S[node];
                for (int j = 0; j <= M; ++j) hs += e.cdf[j] * F.Q[node][j];
                hs += -e.fbX * F.S[node] + e.fb0 * F.T[node];
            };
            if (i > 0) apply(ea, i - 1);
            if (i < k)
                apply(eb, i);
            else
                diag = std::move(eb);
            Hc[i] = hs;
        });
        for (std::size_t i = 0; i <= k; ++i) {
            for (int j = 0; j <= M; ++j) rhs[j] += contrib[i][j];
            H += Hc[i];
        }
        // implicit step: x_j Q_j = rhs_j + conv(diag, Q)_j - Vd_j S,  S = sig0 + sig.Q
        const double den = tk + diag.fbX - diag.fb0;
        if (!(den > 0)) throw NumericalError("solver: tail closure degenerate at t=" + std::to_string(tk));
        const double tau0 = H / den;
        std::vector<double> tau(M + 1), sig(M + 1);
        for (int j = 0; j <= M; ++j) {
            tau[j] = (diag.cdf[j] - diag.fbX * mw[j]) / den;
            sig[j] = mw[j] + tau[j];
        }
        auto trisolve = [&](const std::vector<double>& r) {
            std::vector<double> q(M + 1, 0.0);
            for (int j = 1; j <= M; ++j) {
                double acc = r[j];
                for (int l = 1; l < j; ++l) acc += (diag.RK[j - l] + diag.FK[j - l]) * q[l];
                double dc = j * h - diag.RK[0];
                if (!(dc > 0)) {
                    std::ostringstream os;
                    os << "solver: implicit diagonal coefficient " << dc << " <= 0 at t=" << tk << ", x=" << j * h
                       << " (grid too coarse)";
                    throw NumericalError(os.str());
                }
                q[j] = acc / dc;
            }
            return q;
        };
        std::vector<double> r1(M + 1), r2(M + 1);
        for (int j = 0; j <= M; ++j) {
            r1[j] = rhs[j] - diag.vK[j] * tau0;
            r2[j] = -diag.vK[j];
        }
        auto q1 = trisolve(r1), q2 = trisolve(r2);
        double s1 = 0, s2 = 0;
        for (int j = 0; j <= M; ++j) {
            s1 += sig[j] * q1[j];
            s2 += sig[j] * q2[j];
        }
        const double c = s1 / (1 - s2);
        auto& Q = F.Q[k];
        for (int j = 0; j <= M; ++j) Q[j] = q1[j] + c * q2[j];
        double Tk = tau0, Sk = 0;
        for (int j = 0; j <= M; ++j) {
            Tk += tau[j] * Q[j];
            Sk += mw[j] * Q[j];
        }
        F.T[k] = Tk;
        F.S[k] = Sk + Tk;
        F.b[k] = mprof(tk) - F.S[k];
        for (double v : Q)
            if (!std::isfinite(v)) throw NumericalError("solver: non-finite value at t=" + std::to_string(tk));
    }

    // user grid output
    sol.q = Field2D(tg, xg, "qstar");
    std::vector<double> zg(M + 1);
    for (int j = 0; j <= M; ++j) zg[j] = j * h;
    for (int k = 0; k < n_user; ++k) {
        std::size_t ki = F.user_index[k];
        auto row = F.Q[ki];
        clamp_nonnegative(row, "qstar at t=" + std::to_string(t[ki]));
        for (std::size_t j = 0; j < xg.size(); ++j) sol.q.at(k, j) = interp_linear(zg, row, xg.x[j]);
        double mk = mprof(t[ki]);
        sol.tail_fraction.push_back(F.T[ki] / mk);
        sol.unresolved_fraction.push_back(F.b[ki] / mk);
        sol.tail_flags.push_back(F.T[ki] / mk > opt.tail_tol);
    }
    sol.residuals = compute_residuals(model, sol, opt);
    return sol;
}

ResidualReport compute_residuals(const Model& model, const QStarSolution& sol, const SolverOptions& opt) {
    const InternalField& F = sol.in;
    const int M = F.M;
    const double h = F.h;
    const auto& t = F.tg.t;
    const double dstar = sol.d_star;
    const auto& mprof = sol.m_profile;
    ResidualReport rep;
    const std::size_t nu = F.user_index.size();
    rep.per_t_defining.assign(nu, NAN);
    rep.per_t_cross.assign(nu, NAN);
    SliceSpec sp{true, false, true};
    const double N0 = dstar + mprof.integral(t[0]);
    const double x_lo = std::max(opt.check_x_min, opt.boundary_cells * h);
    for (std::size_t ku = 0; ku < nu; ++ku) {
        const std::size_t k = F.user_index[ku];
        const double tk = t[k];
        if (tk < opt.check_t_min) continue;
        std::vector<double> rK(M, 0.0), rP(M, 0.0);
        {
            Nodes nd = both_ends(tk);
            std::vector<std::vector<double>> part(nd.x.size());
            parallel_for(nd.x.size(), [&](std::size_t q) {
                double u = nd.x[q], s = tk - u, mu = mprof(u);
                part[q].resize(2 * M);
                for (int j = 0; j < M; ++j) {
                    double x = (j + 0.5) * h, p = model.p(s, x);
                    part[q][j] = nd.w[q] * mu * x * p / s;
                    part[q][M + j] = nd.w[q] * mu * p;
                }
            });
            for (std::size_t q = 0; q < nd.x.size(); ++q)
                for (int j = 0; j < M; ++j) {
                    rK[j] += part[q][j];
                    rP[j] += part[q][M + j];
                }
            if (dstar > 0)
                for (int j = 0; j < M; ++j) {
                    double x = (j + 0.5) * h, p = model.p(tk, x);
                    rK[j] += dstar * x * p / tk;
                    rP[j] += dstar * p;
                }
        }
        std::vector<std::vector<double>> cK(k + 1), cP(k + 1);
        parallel_for(k + 1, [&](std::size_t i) {
            CellRule c = cell_rule(t, i, k, opt.diag_levels);
            EndWeights ea, eb;
            ea.init(M + 1, sp);
            eb.init(M + 1, sp);
            for (std::size_t q = 0; q < c.nd.x.size(); ++q) {
                double u = c.nd.x[q];
                Slice sl = make_slice(model, tk - u, h, M, sp);
                // below the first node the resolved part is the jump part, which grows like d* + N*(u)
                double phb = i == 0 ? (dstar + mprof.integral(u)) / N0 : (u - c.ta) / (c.tb - c.ta);
                if (i > 0) ea.add(sl, c.nd.w[q] * (1 - phb));
                eb.add(sl, c.nd.w[q] * phb);
            }
            cK[i].assign(M, 0.0);
            cP[i].assign(M, 0.0);
            auto apply = [&](const EndWeights& e, std::size_t node) {
                conv_mid(e.RK, e.FK, F.Q[node], 1.0, cK[i]);
                conv_mid(e.RP, e.FP, F.Q[node], 1.0, cP[i]);
                for (int j = 0; j < M; ++j) {
                    cK[i][j] -= e.vK[j] * F.S[node];
                    cP[i][j] -= e.vP[j] * F.S[node];
                }
            };
            if (i > 0) apply(ea, i - 1);
            apply(eb, i);
        });
        for (std::size_t i = 0; i <= k; ++i)
            for (int j = 0; j < M; ++j) {
                rK[j] += cK[i][j];
                rP[j] += cP[i][j];
            }
        std::vector<double> lK(M), lP(M);
        double scK = 0, scP = 0;
        for (int j = 0; j < M; ++j) {
            double x = (j + 0.5) * h, q = 0.5 * (F.Q[k][j] + F.Q[k][j + 1]);
            lK[j] = x * q;
            lP[j] = tk * q;
            scK = std::max({scK, std::abs(lK[j]), std::abs(rK[j])});
            scP = std::max({scP, std::abs(lP[j]), std::abs(rP[j])});
        }
        double w19 = 0, w14 = 0;
        for (int j = 0; j < M; ++j) {
            double x = (j + 0.5) * h;
            if (x < x_lo || x > opt.check_x_max) continue;
            auto rel = [](double a, double b, double sc) {
                double d = std::max({std::abs(a), std::abs(b), 1e-3 * sc});
                return d > 0 ? std::abs(a - b) / d : 0.0;
            };
            double e19 = rel(lK[j], rK[j], scK), e14 = rel(lP[j], rP[j], scP);
            if (e19 > rep.residual_defining) {
                rep.residual_defining = e19;
                rep.worst_t_defining = tk;
                rep.worst_x_defining = x;
            }
            if (e14 > rep.residual_cross) {
                rep.residual_cross = e14;
                rep.worst_t_cross = tk;
                rep.worst_x_cross = x;
            }
            w19 = std::max(w19, e19);
            w14 = std::max(w14, e14);
        }
        rep.per_t_defining[ku] = w19;
        rep.per_t_cross[ku] = w14;
    }
    return rep;
}

ExcursionFunctions excursion_mass(const QStarSolution& sol, const SolverOptions& opt) {
    ExcursionFunctions ex;
    const auto& F = sol.in;
    ex.t = sol.q.tg.t;
    ex.d_star = sol.d_star;
    ex.m_star_profile = sol.m_profile;
    for (std::size_t k = 0; k < ex.t.size(); ++k) {
        std::size_t ki = F.user_index[k];
        ex.m_star.push_back(F.S[ki] + F.b[ki]);
    }
    PowerSamples ps(ex.t, ex.m_star);
    ex.theta = ps.theta;
    ex.N_star = ps.cumulative();
    (void)opt;
    return ex;
}

void solve_dual_tail(ExcursionFunctions& ex, const SolverOptions& opt) {
    if (ex.d * ex.d_star != 0) throw InvariantError("dual tail: d * d* must vanish");
    ex.m_profile = solve_dual_profile(ex.m_star_profile, ex.d_star, opt.profile);
    ex.m.clear();
    ex.N.clear();
    for (double tk : ex.t) {
        ex.m.push_back(ex.m_profile(tk));
        ex.N.push_back(ex.m_profile.integral(tk));
    }
}

double renewal_residual(const ExcursionFunctions& ex) {
    double worst = 0;
    for (std::size_t k = 0; k < ex.t.size(); ++k) {
        const double tk = ex.t[k];
        Nodes nd = both_ends(tk);
        double acc = 0;
        for (std::size_t q = 0; q < nd.x.size(); ++q) {
            double u = nd.x[q];
            acc += nd.w[q] * ex.m_profile(tk - u) * ex.m_star_profile.integral(u);
        }
        acc += ex.d * ex.m_star_profile.integral(tk) + ex.d_star * ex.m_profile.integral(tk);
        worst = std::max(worst, std::abs(acc - tk) / tk);
    }
    return worst;
}

double scalar_mass_equation_check(const Model& model, const ExcursionFunctions& ex) {
    PowerSamples ms(ex.t, ex.m_star);
    const auto& t = ex.t;
    std::vector<double> res(t.size(), 0.0);
    parallel_for(t.size(), [&](std::size_t k) {
        const double tk = t[k];
        double acc = ex.d_star * model.positivity(tk);
        for (std::size_t i = 0; i <= k; ++i) {
            double a = i == 0 ? 0.0 : t[i - 1], b = t[i];
            Nodes nd = (i == 0 && k == 0) ? both_ends(tk, 30)
                     : i == 0             ? graded_nodes(a, b, true, 30)
                     : i == k             ? graded_nodes(a, b, false, 30)
                                          : gauss_nodes(a, b);
            for (std::size_t q = 0; q < nd.x.size(); ++q) {
                double u = nd.x[q];
                acc += nd.w[q] * ms(u) * model.positivity(tk - u);
            }
        }
        double lhs = tk * ex.m_star[k];
        res[k] = std::abs(lhs - acc) / std::max(std::abs(lhs), 1e-300);
    });
    return *std::max_element(res.begin(), res.end());
}

std::string diagnostics_json(const QStarSolution& sol, const ExcursionFunctions& ex, const PipelineChecks& c,
                             const SolverOptions& opt) {
    using nlohmann::ordered_json;
    ordered_json j;
    auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
    j["residual_cross"] = sol.residuals.residual_cross;
    j["residual_defining"] = sol.residuals.residual_defining;
    j["residual_5_53"] = c.renewal_residual;
    j["scalar_mass_residual"] = c.scalar_mass;
    j["dual_symmetry"] = num(c.dual_symmetry);
    j["worst_cross"] = {{"t", sol.residuals.worst_t_cross}, {"x", sol.residuals.worst_x_cross}};
    j["worst_defining"] = {{"t", sol.residuals.worst_t_defining}, {"x", sol.residuals.worst_x_defining}};
    j["tail_flags"] = sol.tail_flags;
    j["tail_fraction"] = sol.tail_fraction;
    j["unresolved_fraction"] = sol.unresolved_fraction;
    std::vector<ordered_json> p19, p14;
    for (double v : sol.residuals.per_t_defining) p19.push_back(num(v));
    for (double v : sol.residuals.per_t_cross) p14.push_back(num(v));
    j["per_t_defining"] = p19;
    j["per_t_cross"] = p14;
    j["d_star"] = ex.d_star;
    j["fristedt_normalization"] = ex.d_star + laplace_at_one(ex.m_star_profile);
    j["small_t_exponent"] = ex.theta;
    j["tolerances"] = {{"tol_solve", opt.tol_solve},
                       {"tol_cross", opt.tol_cross},
                       {"tol_consistency", opt.tol_consistency},
                       {"tail_tol", opt.tail_tol}};
    j["window"] = {{"t_min", opt.check_t_min},
                   {"x_min", std::max(opt.check_x_min, opt.boundary_cells * sol.in.h)},
                   {"x_max", num(opt.check_x_max)}};
    j["internal_grid"] = {{"time_nodes", sol.in.tg.size()}, {"space_intervals", sol.in.M}, {"h", sol.in.h}};
    j["pass"] = sol.residuals.residual_defining <= opt.tol_solve && sol.residuals.residual_cross <= opt.tol_cross &&
                c.renewal_residual <= opt.tol_consistency && c.scalar_mass <= opt.tol_solve;
    return j.dump(2) + "\n";
}

}  // namespace lf
