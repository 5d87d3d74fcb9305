#pragma once

#include <map>
#include <string>
#include <vector>

#include "levyfluct/entrance_law.hpp"

namespace lf {

struct NoLevyDensityError : ConfigError {
    using ConfigError::ConfigError;
};

enum class Quantity { P, QStar, F };
const char* quantity_name(Quantity q);

// What the harness reads: fields on one (t, x) grid plus the excursion functions at the same times.
struct PipelineFields {
    Field2D p, qstar, f;
    Field2D qstar_tail;  // Q*(t, (x, inf)) including mass beyond the solver grid
    std::vector<double> m_star, N_star;  // n*(t < zeta) and its integral, per t
    double d_star = 0;
};

// p from the model; the rest from a solved pipeline
PipelineFields collect_fields(const Model& model, const QStarSolution& qsol, const ExcursionFunctions& ex,
                              const Field2D& f);
Field2D qstar_tail_field(const QStarSolution& qsol);

// git blob id of the field's CSV serialization
std::string git_blob_sha1(const std::string& content);
std::string field_hash(const Field2D& f);

struct RatioReport {
    std::string model;
    Quantity quantity = Quantity::P;
    std::string normalizer;  // "t*nu" or "(d*+N*)*nu"
    std::vector<double> t, x;
    std::vector<double> r;           // row-major [k][j], NaN where excluded
    std::vector<bool> excluded;      // normalizer underflow
    double x0 = 0, t0 = 0;
    std::vector<double> sup_over_x;  // per t: sup_{x >= x0} |r - 1|
    std::vector<double> sup_over_t;  // per x: sup_{t <= t0} |r - 1|
    std::map<std::string, std::string> input_hashes;

    double at(std::size_t k, std::size_t j) const { return r[k * x.size() + j]; }
};

RatioReport ratio_report(const Model& model, Quantity q, const PipelineFields& fields, double x0, double t0);
// plain field version, used for self-tests against closed forms
RatioReport ratio_report(const Model& model, Quantity q, const Field2D& field, const std::vector<double>& N_star,
                         double d_star, double x0, double t0);

std::vector<double> sup_over_x(const RatioReport& r, double x0);
std::vector<double> sup_over_t(const RatioReport& r, double t0);

struct Verdict {
    bool pass = false;
    std::string axis;              // "t" (decreasing) or "x" (increasing)
    std::vector<double> nodes, profile;  // in the order the trend is judged
    double final_value = 0, eps_final = 0, jitter = 0, noise_floor = 0;
    std::string reason;
};

// Profile must not grow by more than jitter of its own value from one node to the next, and must end at or
// below eps. Values under noise_floor (the accuracy of the field) carry no trend and never count as growth.
Verdict trend_verdict(const std::vector<double>& nodes, const std::vector<double>& profile, double eps_final,
                      double jitter, std::string axis, double noise_floor = 0);

// at least 4 nodes per decade over at least 2 decades, counted down from the largest time
Verdict small_t_uniformity(const RatioReport& r, double x0, double eps_final, double jitter = 0.1,
                           double noise_floor = 0);
// at least 1.5 decades of x above x0
Verdict large_x_uniformity(const RatioReport& r, double t0, double eps_final, double jitter = 0.1,
                           double noise_floor = 0);

struct Window {
    double t0 = 0.1, x_lo = 1, x_hi = INFINITY;
};
struct Comparability {
    struct Entry {
        Quantity quantity;
        double c_min = 0, c_max = 0;
        std::size_t nodes = 0;
    };
    std::vector<Entry> entries;
    Window window;
    double bound = 0;  // c_max / c_min must stay below this
    double lo = 0, hi = INFINITY;  // optional range every ratio must sit in
    bool pass = false;
};
Comparability comparability_check(const Model& model, const PipelineFields& fields, const Window& w, double bound,
                                  double lo = 0, double hi = INFINITY);

struct TailTrend {
    std::vector<double> t, s;  // s(t) = sup_{x >= x0} Q*(t,(x,inf)) h*(x) / n*(t < zeta)
    double x0 = 0;
    Verdict verdict;
};
TailTrend entrance_tail_trend(const Model& model, const PipelineFields& fields, double x0, double eps_final,
                              double jitter = 0.1, double noise_floor = 0);

struct Boundedness {
    std::vector<double> t, B;  // B(t) = max_{x >= x1} q*_t(x) / (d* + N*(t))
    double x1 = 0, t0 = 0, bound = 0;
    bool pass = false;
};
Boundedness entrance_boundedness(const PipelineFields& fields, double x1, double t0, double bound);

std::string report_json(const RatioReport& r, const std::vector<Verdict>& verdicts,
                        const std::map<std::string, double>& tolerances);

}  // namespace lf
