#pragma once

#include <functional>

#include "levyfluct/core.hpp"

namespace lf {

struct SeriesEvalPolicy {
    int max_terms = 600;
    double abs_tol = 1e-300;
    double rel_tol = 1e-16;
    // largest tolerated cancellation sum|term|/|sum| before the left-tail regime takes over
    double max_cancellation = 1e6;
    void validate() const;
};

struct SeriesConvergenceError : NumericalError {
    double partial_sum;
    int terms;
    SeriesConvergenceError(const std::string& msg, double partial, int n)
        : NumericalError(msg), partial_sum(partial), terms(n) {}
};

double gamma_fn(double z);
double bessel_k(double nu, double z);
// e^z K_nu(z), finite for large z
double bessel_k_scaled(double nu, double z);

// One-sided stable law with Laplace transform exp(-lambda^beta).
struct SeriesValue {
    double value;
    double cancellation;
    int terms;
};
SeriesValue zolotarev_series(double beta, double u, const SeriesEvalPolicy& pol = {});
// Smallest u where the series is used; below it the Kanter integral takes over.
double series_crossover(double beta, const SeriesEvalPolicy& pol = {});
double stable1_density(double beta, double u, const SeriesEvalPolicy& pol = {});
double stable1_cdf(double beta, double u);
double stable1_sf(double beta, double u);
// Kanter integral form of the density, valid for every u > 0
double kanter_density(double beta, double u);

// Subordinator normalisation: Levy density (2 pi)^{-1/2} s^{-1-beta}, hence
// Laplace exponent c_beta lambda^beta with c_beta = Gamma(1-beta)/(beta sqrt(2 pi)).
// For beta = 1/2 this is exp(-t sqrt(2 lambda)), the hitting time of level t by BM.
double subordinator_scale(double beta);
double positive_stable_density(double beta, double t, double u);
double positive_stable_sf(double beta, double t, double u);  // P(T_t > u)

// Integral of g(s) eta_t(ds) over (0, inf). Log-spaced Gauss panels are added outward
// from the bulk until the integrand drops below 1e-14 of its peak.
double subordinate(double beta, double t, const std::function<double(double)>& g);

// Density of B_{T_t} with B standard (variance s at time s); alpha = 2 is B_t itself.
double symmetric_stable_density(double alpha, double t, double x);

}  // namespace lf
