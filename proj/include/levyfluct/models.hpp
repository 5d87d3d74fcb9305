#pragma once

#include <map>
#include <string>

#include "levyfluct/core.hpp"

namespace lf {

struct ModelCapabilities {
    bool has_closed_p = false;
    bool has_closed_qstar = false;
    bool has_h_star = false;
    bool supports_negative_x = true;
};

// int_a^b w^k p_s(w) dw for k = 0, 1, 2
struct Moments {
    double m0 = 0, m1 = 0, m2 = 0;
};

class Model {
public:
    explicit Model(ModelSpec spec);

    const ModelSpec& spec() const { return spec_; }
    ModelCapabilities capabilities() const;

    double p(double t, double x) const;
    double levy_density(double x) const;
    double positivity(double t) const;  // P(X_t > 0)
    // Renewal function up to a model-wide constant; only ratios are meaningful.
    double h_star(double x) const;

    Moments partial_moments(double s, double a, double b) const;  // 0 <= a < b < inf
    double sf(double s, double y) const;                           // P(X_s > y), y >= 0

    bool closed_kernel() const;  // partial_moments and sf without nested quadrature

private:
    ModelSpec spec_;
};

struct RegularityProfile {
    bool regular_up, regular_down;
    double d;
    std::optional<double> d_star;  // nullopt: estimate required
};
RegularityProfile regularity_profile(const ModelSpec& m);

// Model block of a config: model, alpha, a, d_star (optional).
ModelSpec parse_model(const std::map<std::string, std::string>& kv);

double norm_cdf(double z);
double norm_sf(double z);

}  // namespace lf
