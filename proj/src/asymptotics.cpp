#include "levyfluct/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <openssl/evp.h>

#include "json.hpp"
#include "levyfluct/parallel.hpp"

namespace lf {

namespace {

constexpr double kUnderflow = 1e-300;

void require_levy_density(const Model& m) {
    if (m.spec().kind == ModelKind::BrownianMotion)
        throw NoLevyDensityError("no Levy density: brownian motion has no jump part, ratio reports are undefined");
}

std::string field_csv(const Field2D& f) {
    std::string s = "t,x," + f.label + "\n";
    for (std::size_t k = 0; k < f.tg.size(); ++k)
        for (std::size_t j = 0; j < f.xg.size(); ++j)
            s += fmt17(f.tg.t[k]) + "," + fmt17(f.xg.x[j]) + "," + fmt17(f.at(k, j)) + "\n";
    return s;
}

std::string vector_csv(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += fmt17(x) + "\n";
    return s;
}

}  // namespace

const char* quantity_name(Quantity q) {
    switch (q) {
        case Quantity::P: return "p";
        case Quantity::QStar: return "qstar";
        case Quantity::F: return "f";
    }
    return "?";
}

std::string git_blob_sha1(const std::string& content) {
    std::string head = "blob " + std::to_string(content.size());
    head.push_back('\0');
    EVP_MD_CTX* c = EVP_MD_CTX_new();
    unsigned char d[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    bool ok = c && EVP_DigestInit_ex(c, EVP_sha1(), nullptr) && EVP_DigestUpdate(c, head.data(), head.size()) &&
              EVP_DigestUpdate(c, content.data(), content.size()) && EVP_DigestFinal_ex(c, d, &n);
    EVP_MD_CTX_free(c);
    if (!ok) throw NumericalError("sha1 failed");
    std::string hex;
    char b[3];
    for (unsigned i = 0; i < n; ++i) {
        std::snprintf(b, sizeof b, "%02x", d[i]);
        hex += b;
    }
    return hex;
}

std::string field_hash(const Field2D& f) { return git_blob_sha1(field_csv(f)); }

Field2D qstar_tail_field(const QStarSolution& qsol) {
    const InternalField& F = qsol.in;
    Field2D out(qsol.q.tg, qsol.q.xg, "qstar_tail");
    for (std::size_t k = 0; k < out.tg.size(); ++k) {
        std::size_t i = F.user_index[k];
        for (std::size_t j = 0; j < out.xg.size(); ++j)
            out.at(k, j) = pl_tail(F.Q[i], F.h, std::max(0.0, out.xg.x[j])) + F.T[i];
    }
    return out;
}

PipelineFields collect_fields(const Model& model, const QStarSolution& qsol, const ExcursionFunctions& ex,
                              const Field2D& f) {
    PipelineFields pf;
    pf.qstar = qsol.q;
    pf.f = f;
    pf.qstar_tail = qstar_tail_field(qsol);
    pf.p = Field2D(qsol.q.tg, qsol.q.xg, "p");
    parallel_for(pf.p.tg.size(), [&](std::size_t k) {
        for (std::size_t j = 0; j < pf.p.xg.size(); ++j) pf.p.at(k, j) = model.p(pf.p.tg.t[k], pf.p.xg.x[j]);
    });
    pf.m_star = ex.m_star;
    pf.N_star = ex.N_star;
    pf.d_star = ex.d_star;
    return pf;
}

RatioReport ratio_report(const Model& model, Quantity q, const Field2D& field, const std::vector<double>& N_star,
                         double d_star, double x0, double t0) {
    require_levy_density(model);
    if (q == Quantity::QStar && N_star.size() != field.tg.size())
        throw ConfigError("ratio_report: N* must be given at every time node");
    RatioReport r;
    r.model = kind_name(model.spec().kind);
    r.quantity = q;
    r.normalizer = q == Quantity::QStar ? "(d*+N*)*nu" : "t*nu";
    r.t = field.tg.t;
    r.x = field.xg.x;
    r.x0 = x0;
    r.t0 = t0;
    const std::size_t nt = r.t.size(), nx = r.x.size();
    r.r.assign(nt * nx, NAN);
    r.excluded.assign(nt * nx, true);
    std::vector<double> nu(nx, 0.0);
    for (std::size_t j = 0; j < nx; ++j)
        if (r.x[j] > 0) nu[j] = model.levy_density(r.x[j]);
    for (std::size_t k = 0; k < nt; ++k) {
        double c = q == Quantity::QStar ? d_star + N_star[k] : r.t[k];
        for (std::size_t j = 0; j < nx; ++j) {
            double den = c * nu[j], num = field.at(k, j);
            if (!(den > kUnderflow) || !std::isfinite(den) || !std::isfinite(num)) continue;
            r.r[k * nx + j] = num / den;
            r.excluded[k * nx + j] = false;
        }
    }
    r.input_hashes[quantity_name(q)] = field_hash(field);
    if (q == Quantity::QStar) r.input_hashes["N_star"] = git_blob_sha1(vector_csv(N_star));
    r.sup_over_x = sup_over_x(r, x0);
    r.sup_over_t = sup_over_t(r, t0);
    return r;
}

RatioReport ratio_report(const Model& model, Quantity q, const PipelineFields& fields, double x0, double t0) {
    const Field2D& f = q == Quantity::P ? fields.p : q == Quantity::QStar ? fields.qstar : fields.f;
    return ratio_report(model, q, f, fields.N_star, fields.d_star, x0, t0);
}

std::vector<double> sup_over_x(const RatioReport& r, double x0) {
    std::vector<double> out(r.t.size(), NAN);
    for (std::size_t k = 0; k < r.t.size(); ++k)
        for (std::size_t j = 0; j < r.x.size(); ++j) {
            if (r.x[j] < x0 || r.excluded[k * r.x.size() + j]) continue;
            double v = std::abs(r.at(k, j) - 1);
            out[k] = std::isnan(out[k]) ? v : std::max(out[k], v);
        }
    return out;
}

std::vector<double> sup_over_t(const RatioReport& r, double t0) {
    std::vector<double> out(r.x.size(), NAN);
    for (std::size_t j = 0; j < r.x.size(); ++j)
        for (std::size_t k = 0; k < r.t.size(); ++k) {
            if (r.t[k] > t0 || r.excluded[k * r.x.size() + j]) continue;
            double v = std::abs(r.at(k, j) - 1);
            out[j] = std::isnan(out[j]) ? v : std::max(out[j], v);
        }
    return out;
}

Verdict trend_verdict(const std::vector<double>& nodes, const std::vector<double>& profile, double eps_final,
                      double jitter, std::string axis, double noise_floor) {
    Verdict v;
    v.axis = std::move(axis);
    v.nodes = nodes;
    v.profile = profile;
    v.eps_final = eps_final;
    v.jitter = jitter;
    v.noise_floor = noise_floor;
    if (profile.empty()) {
        v.reason = "empty profile";
        return v;
    }
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (std::isnan(profile[i])) {
            v.reason = "no admissible node at " + v.axis + " = " + fmt17(nodes[i]);
            return v;
        }
        if (i > 0 && profile[i] > std::max(profile[i - 1] * (1 + jitter), noise_floor)) {
            v.reason = "profile grows from " + fmt17(profile[i - 1]) + " to " + fmt17(profile[i]) + " at " + v.axis +
                       " = " + fmt17(nodes[i]);
            return v;
        }
    }
    v.final_value = profile.back();
    if (v.final_value > eps_final) {
        v.reason = "final value " + fmt17(v.final_value) + " above " + fmt17(eps_final);
        return v;
    }
    v.pass = true;
    v.reason = "ok";
    return v;
}

Verdict small_t_uniformity(const RatioReport& r, double x0, double eps_final, double jitter, double noise_floor) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < r.t.size(); ++k)
        if (r.t[k] > 0) idx.push_back(k);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return r.t[a] > r.t[b]; });
    if (idx.size() < 8) throw ConfigError("small_t_uniformity: too few time nodes");
    const double top = r.t[idx.front()], bottom = r.t[idx.back()];
    int full = 0;
    for (int d = 0;; ++d) {
        double hi = top * std::pow(10.0, -d), lo = hi / 10;
        if (lo < bottom * (1 - 1e-12)) break;
        int c = 0;
        for (auto k : idx) c += r.t[k] <= hi && r.t[k] > lo;
        if (c < 4) break;
        ++full;
    }
    if (full < 2) throw ConfigError("small_t_uniformity: too few time nodes (need 4 per decade over 2 decades)");
    std::vector<double> all = sup_over_x(r, x0), nodes, prof;
    for (auto k : idx) {
        nodes.push_back(r.t[k]);
        prof.push_back(all[k]);
    }
    return trend_verdict(nodes, prof, eps_final, jitter, "t", noise_floor);
}

Verdict large_x_uniformity(const RatioReport& r, double t0, double eps_final, double jitter, double noise_floor) {
    std::vector<double> all = sup_over_t(r, t0), nodes, prof;
    for (std::size_t j = 0; j < r.x.size(); ++j)
        if (r.x[j] >= r.x0 && r.x[j] > 0) {
            nodes.push_back(r.x[j]);
            prof.push_back(all[j]);
        }
    if (nodes.size() < 4 || std::log10(nodes.back() / nodes.front()) < 1.5 - 1e-12)
        throw ConfigError("large_x_uniformity: too few space nodes (need 1.5 decades above x0)");
    return trend_verdict(nodes, prof, eps_final, jitter, "x", noise_floor);
}

Comparability comparability_check(const Model& model, const PipelineFields& fields, const Window& w, double bound,
                                  double lo, double hi) {
    Comparability c;
    c.window = w;
    c.bound = bound;
    c.lo = lo;
    c.hi = hi;
    c.pass = true;
    for (Quantity q : {Quantity::P, Quantity::QStar, Quantity::F}) {
        RatioReport r = ratio_report(model, q, fields, w.x_lo, w.t0);
        Comparability::Entry e{q, INFINITY, -INFINITY, 0};
        for (std::size_t k = 0; k < r.t.size(); ++k)
            for (std::size_t j = 0; j < r.x.size(); ++j) {
                if (r.t[k] > w.t0 || r.x[j] < w.x_lo || r.x[j] > w.x_hi || r.excluded[k * r.x.size() + j]) continue;
                e.c_min = std::min(e.c_min, r.at(k, j));
                e.c_max = std::max(e.c_max, r.at(k, j));
                ++e.nodes;
            }
        if (e.nodes == 0) throw ConfigError("comparability_check: window empty");
        bool ok = e.c_min > 0 && std::isfinite(e.c_max) && e.c_max / e.c_min < bound && e.c_min >= lo && e.c_max <= hi;
        c.pass = c.pass && ok;
        c.entries.push_back(e);
    }
    return c;
}

TailTrend entrance_tail_trend(const Model& model, const PipelineFields& fields, double x0, double eps_final,
                              double jitter, double noise_floor) {
    if (!model.capabilities().has_h_star)
        throw ConfigError(std::string("entrance_tail_trend: ") + kind_name(model.spec().kind) +
                          " exposes no renewal function");
    const Field2D& Q = fields.qstar_tail;
    if (fields.m_star.size() != Q.tg.size()) throw ConfigError("entrance_tail_trend: n* must be given per time");
    TailTrend tr;
    tr.x0 = x0;
    for (std::size_t kk = Q.tg.size(); kk-- > 0;) {
        double s = 0;
        for (std::size_t j = 0; j < Q.xg.size(); ++j)
            if (Q.xg.x[j] >= x0 && Q.xg.x[j] > 0)
                s = std::max(s, std::max(0.0, Q.at(kk, j)) * model.h_star(Q.xg.x[j]) / fields.m_star[kk]);
        tr.t.push_back(Q.tg.t[kk]);
        tr.s.push_back(s);
    }
    tr.verdict = trend_verdict(tr.t, tr.s, eps_final, jitter, "t", noise_floor);
    return tr;
}

Boundedness entrance_boundedness(const PipelineFields& fields, double x1, double t0, double bound) {
    Boundedness b;
    b.x1 = x1;
    b.t0 = t0;
    b.bound = bound;
    b.pass = true;
    const Field2D& q = fields.qstar;
    for (std::size_t k = 0; k < q.tg.size(); ++k) {
        if (q.tg.t[k] > t0) continue;
        double den = fields.d_star + fields.N_star.at(k), m = 0;
        for (std::size_t j = 0; j < q.xg.size(); ++j)
            if (q.xg.x[j] >= x1) m = std::max(m, q.at(k, j) / den);
        b.t.push_back(q.tg.t[k]);
        b.B.push_back(m);
        b.pass = b.pass && std::isfinite(m) && m <= bound;
    }
    if (b.t.empty()) throw ConfigError("entrance_boundedness: no time node below t0");
    return b;
}

std::string report_json(const RatioReport& r, const std::vector<Verdict>& verdicts,
                        const std::map<std::string, double>& tolerances) {
    using J = nlohmann::ordered_json;
    J j;
    j["model"] = r.model;
    j["quantity"] = quantity_name(r.quantity);
    j["normalizer"] = r.normalizer;
    j["window"] = J{{"x0", r.x0}, {"t0", r.t0}, {"t", r.t}, {"x", r.x}};
    J prof = J::array();
    prof.push_back(J{{"name", "sup_x_ge_x0"}, {"axis", "t"}, {"values", r.sup_over_x}});
    prof.push_back(J{{"name", "sup_t_le_t0"}, {"axis", "x"}, {"values", r.sup_over_t}});
    J checks = J::array();
    bool pass = !verdicts.empty();
    for (const auto& v : verdicts) {
        pass = pass && v.pass;
        checks.push_back(J{{"axis", v.axis},
                           {"nodes", v.nodes},
                           {"profile", v.profile},
                           {"final_value", v.final_value},
                           {"eps_final", v.eps_final},
                           {"jitter", v.jitter},
                           {"noise_floor", v.noise_floor},
                           {"verdict", v.pass ? "PASS" : "FAIL"},
                           {"reason", v.reason}});
    }
    j["profiles"] = prof;
    j["checks"] = checks;
    j["verdict"] = verdicts.empty() ? "NONE" : pass ? "PASS" : "FAIL";
    J tol = J::object();
    for (const auto& [k, v] : tolerances) tol[k] = v;
    j["tolerances"] = tol;
    J h = J::object();
    for (const auto& [k, v] : r.input_hashes) h[k] = v;
    j["input_hashes"] = h;
    return j.dump(2) + "\n";
}

}  // namespace lf
