#include "levyfluct/supremum.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "levyfluct/parallel.hpp"
#include "levyfluct/quad.hpp"

namespace lf {

namespace {

// q_u on the internal grid at an arbitrary time, linear between nodes and rescaled to the mass profile
struct Row {
    std::vector<double> Q;
    double b = 0, T = 0;
};

Row row_at(const QStarSolution& s, double u) {
    const InternalField& F = s.in;
    const auto& t = F.tg.t;
    Row r;
    r.Q.assign(F.M + 1, 0.0);
    if (u <= t.front()) {
        // below the first node the law sits inside one cell
        r.b = s.m_profile(u);
        return r;
    }
    std::size_t i = std::upper_bound(t.begin(), t.end(), u) - t.begin();
    if (i >= t.size()) i = t.size() - 1;
    double lam = std::clamp((u - t[i - 1]) / (t[i] - t[i - 1]), 0.0, 1.0);
    double ma = F.S[i - 1] + F.b[i - 1], mb = F.S[i] + F.b[i];
    double scale = s.m_profile(u) / ((1 - lam) * ma + lam * mb);
    for (int j = 0; j <= F.M; ++j) r.Q[j] = scale * ((1 - lam) * F.Q[i - 1][j] + lam * F.Q[i][j]);
    r.b = scale * ((1 - lam) * F.b[i - 1] + lam * F.b[i]);
    r.T = scale * ((1 - lam) * F.T[i - 1] + lam * F.T[i]);
    return r;
}

bool symmetric(const Model& m) {
    return m.spec().kind == ModelKind::BrownianMotion || m.spec().kind == ModelKind::SymmetricStable;
}

}  // namespace

double atom_mass(const ExcursionFunctions& ex, double t) {
    if (ex.d_star == 0) return 0;
    return ex.d_star * ex.m_profile(t);
}

SupremumSolution supremum_density(const Model& model, const QStarSolution& qsol, const ExcursionFunctions& ex) {
    const InternalField& F = qsol.in;
    const auto& t = F.tg.t;
    const std::size_t nu = F.user_index.size();
    if (ex.t.size() != nu || qsol.q.tg.size() != nu) throw ConfigError("supremum: incompatible grids");
    if (ex.m_profile.u.empty()) throw ConfigError("supremum: dual tail not solved");
    (void)model;
    SupremumSolution out;
    out.f = Field2D(qsol.q.tg, qsol.q.xg, "f");
    out.h = F.h;
    out.rows.resize(nu);
    out.atom_mass.assign(nu, 0.0);
    out.resolved_mass.assign(nu, 0.0);
    out.unresolved_mass.assign(nu, 0.0);
    out.tail_mass.assign(nu, 0.0);
    std::vector<double> zg(F.M + 1);
    for (int j = 0; j <= F.M; ++j) zg[j] = j * F.h;

    parallel_for(nu, [&](std::size_t ku) {
        const std::size_t k = F.user_index[ku];
        const double tk = t[k];
        // weights of the internal nodes in int_0^t n(t-u) q_u du
        std::vector<double> W(k + 1, 0.0);
        double unres = 0, tail = 0;
        {
            // before the first node the law sits within a cell of the origin except for the jump part,
            // which grows like d* + N*(u): q_u = q_{t0} (d* + N*(u))/(d* + N*(t0)) away from the origin,
            // the rest of m(u) at the origin
            Nodes nd = graded_nodes(0, k == 0 ? t[0] / 2 : t[0], true, 40);
            if (k == 0) {
                Nodes r = graded_nodes(t[0] / 2, t[0], false, 40);
                nd.x.insert(nd.x.end(), r.x.begin(), r.x.end());
                nd.w.insert(nd.w.end(), r.w.begin(), r.w.end());
            }
            const double N0 = qsol.d_star + qsol.m_profile.integral(t[0]);
            for (std::size_t q = 0; q < nd.x.size(); ++q) {
                double w = nd.w[q] * ex.m_profile(tk - nd.x[q]);
                double rho = N0 > 0 ? (qsol.d_star + qsol.m_profile.integral(nd.x[q])) / N0 : 1.0;
                W[0] += w * rho;
                unres += w * (qsol.m_profile(nd.x[q]) - rho * (F.S[0] + F.b[0]));
            }
        }
        for (std::size_t i = 1; i <= k; ++i) {
            double a = t[i - 1], b = t[i];
            Nodes nd = i == k ? graded_nodes(a, b, false, 40) : gauss_nodes(a, b);
            for (std::size_t q = 0; q < nd.x.size(); ++q) {
                double w = nd.w[q] * ex.m_profile(tk - nd.x[q]);
                double lam = (nd.x[q] - a) / (b - a);
                W[i - 1] += w * (1 - lam);
                W[i] += w * lam;
            }
        }
        std::vector<double> row(F.M + 1, 0.0);
        for (std::size_t i = 0; i <= k; ++i) {
            for (int j = 0; j <= F.M; ++j) row[j] += W[i] * F.Q[i][j];
            unres += W[i] * F.b[i];
            tail += W[i] * F.T[i];
        }
        if (ex.d > 0) {
            for (int j = 0; j <= F.M; ++j) row[j] += ex.d * F.Q[k][j];
            unres += ex.d * F.b[k];
            tail += ex.d * F.T[k];
        }
        clamp_nonnegative(row, "f at t=" + std::to_string(tk));
        out.atom_mass[ku] = atom_mass(ex, tk);
        out.resolved_mass[ku] = pl_tail(row, F.h, 0);
        out.unresolved_mass[ku] = unres;
        out.tail_mass[ku] = tail;
        for (std::size_t j = 0; j < out.f.xg.size(); ++j) out.f.at(ku, j) = interp_linear(zg, row, out.f.xg.x[j]);
        out.rows[ku] = std::move(row);
    });
    for (double a : out.atom_mass)
        if (!(a >= 0 && a <= 1)) throw InvariantError("supremum: atom mass outside [0,1]");
    return out;
}

TailEstimate supremum_tail(const SupremumSolution& sol, std::size_t k, double x) {
    TailEstimate e;
    e.value = pl_tail(sol.rows.at(k), sol.h, std::max(0.0, x)) + sol.tail_mass[k];
    e.unresolved = sol.unresolved_mass[k];
    return e;
}

Reconstruction reconstruct_p(const Model& model, const QStarSolution& qsol, const ExcursionFunctions& ex) {
    if (!symmetric(model)) throw ConfigError("reconstruct_p: model is not symmetric");
    if (ex.d != 0 || ex.d_star != 0) throw ConfigError("reconstruct_p: requires d = d* = 0");
    const InternalField& F = qsol.in;
    const int M = F.M;
    const double h = F.h, X = F.X();
    const std::size_t nu = F.user_index.size();
    const auto& xs = qsol.q.xg.x;
    Reconstruction rec;
    rec.p = Field2D(qsol.q.tg, qsol.q.xg, "p_reconstructed");
    rec.truncated_fraction = Field2D(qsol.q.tg, qsol.q.xg, "truncated_fraction");
    const int jmax = std::min(M, int(std::ceil(xs.back() / h)));
    std::vector<double> zg(jmax + 1);
    for (int j = 0; j <= jmax; ++j) zg[j] = j * h;

    for (std::size_t ku = 0; ku < nu; ++ku) {
        const double tk = F.tg.t[F.user_index[ku]];
        Nodes nd = graded_nodes(0, tk / 2, true, 20);
        Nodes rt = graded_nodes(tk / 2, tk, false, 20);
        nd.x.insert(nd.x.end(), rt.x.begin(), rt.x.end());
        nd.w.insert(nd.w.end(), rt.w.begin(), rt.w.end());
        std::vector<std::vector<double>> part(nd.x.size()), cut(nd.x.size());
        parallel_for(nd.x.size(), [&](std::size_t q) {
            const double u = nd.x[q];
            Row a = row_at(qsol, u), b = row_at(qsol, tk - u);
            // cumulative mass of q_{t-u} from the top of the grid down
            std::vector<double> above(M + 1, 0.0);
            above[M] = b.T;
            for (int c = M - 1; c >= 0; --c) above[c] = above[c + 1] + 0.5 * h * (b.Q[c] + b.Q[c + 1]);
            part[q].assign(jmax + 1, 0.0);
            cut[q].assign(jmax + 1, 0.0);
            for (int j = 1; j <= jmax; ++j) {
                double acc = b.b * a.Q[j];
                for (int c = 0; c + j < M; ++c) {
                    double a0 = a.Q[j + c], a1 = a.Q[j + c + 1], b0 = b.Q[c], b1 = b.Q[c + 1];
                    acc += h / 6 * (2 * a0 * b0 + a0 * b1 + a1 * b0 + 2 * a1 * b1);
                }
                part[q][j] = nd.w[q] * acc;
                // dropped part, with q_u frozen at its edge value
                cut[q][j] = nd.w[q] * a.Q[M] * above[M - j];
            }
        });
        std::vector<double> pj(jmax + 1, 0.0), cj(jmax + 1, 0.0);
        for (std::size_t q = 0; q < nd.x.size(); ++q)
            for (int j = 0; j <= jmax; ++j) {
                pj[j] += part[q][j];
                cj[j] += cut[q][j];
            }
        for (std::size_t j = 0; j < xs.size(); ++j) {
            double x = xs[j];
            if (!(x > 0)) throw ConfigError("reconstruct_p: defined for x > 0 only");
            double v = x >= X ? 0.0 : interp_linear(zg, pj, x);
            double c = x >= X ? 0.0 : interp_linear(zg, cj, x);
            rec.p.at(ku, j) = v;
            rec.truncated_fraction.at(ku, j) = v + c > 0 ? c / (v + c) : 0.0;
        }
    }
    return rec;
}

std::string mass_balance_json(const SupremumSolution& sol) {
    nlohmann::ordered_json j;
    j["t"] = sol.f.tg.t;
    j["atom_mass"] = sol.atom_mass;
    j["resolved_mass"] = sol.resolved_mass;
    j["unresolved_mass"] = sol.unresolved_mass;
    j["tail_mass"] = sol.tail_mass;
    std::vector<double> tot;
    double worst = 0;
    for (std::size_t k = 0; k < sol.atom_mass.size(); ++k) {
        tot.push_back(sol.mass_total(k));
        worst = std::max(worst, std::abs(tot.back() - 1));
    }
    j["total"] = tot;
    j["max_abs_deviation"] = worst;
    return j.dump(2) + "\n";
}

}  // namespace lf
