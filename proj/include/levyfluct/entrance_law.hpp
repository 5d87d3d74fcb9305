#pragma once

#include <string>
#include <cmath>
#include <vector>

#include "levyfluct/core.hpp"
#include "levyfluct/models.hpp"

namespace lf {

// f(u) = u^{-theta} g(u), g piecewise linear in log u on a geometric grid,
// constant beyond either end.
struct SingularProfile {
    double theta = 0;
    std::vector<double> u, g;
    std::vector<double> cum;  // int_0^{u_i} f, filled by finalize()
    double operator()(double s) const;
    double integral(double t) const;  // int_0^t f
    void finalize();
};

// Samples y_k at t_k joined by local power laws, with c t^{-theta} below t_0 fitted on the three smallest nodes.
struct PowerSamples {
    std::vector<double> t, y;
    double theta = 0, c = 0;
    explicit PowerSamples(std::vector<double> tt, std::vector<double> yy);
    double operator()(double s) const;
    std::vector<double> cumulative() const;  // int_0^{t_k}
};

struct ProfileOptions {
    double u_min = 1e-10;
    double u_max = 60;
    int per_decade = 40;
};

// n*(t < zeta) from t m(t) = d* P(X_t>0) + int_0^t m(u) P(X_{t-u}>0) du,
// scaled so that d* + int e^{-t} m(t) dt = 1.
SingularProfile solve_scalar_mass(const Model& model, double d_star, const ProfileOptions& opt = {});
// n(t < zeta) from d* n(t) + int_0^t n(s) m(t-s) ds = 1 (the time derivative of the renewal identity, d = 0).
SingularProfile solve_dual_profile(const SingularProfile& m, double d_star, const ProfileOptions& opt = {});
// int e^{-t} f(t) dt
double laplace_at_one(const SingularProfile& f);

struct ExcursionFunctions {
    std::vector<double> t;
    std::vector<double> m_star, N_star, m, N;
    double d = 0, d_star = 0;
    double theta = 0;  // small-t exponent of m_star from the power fit
    SingularProfile m_star_profile, m_profile;
};

struct SolverOptions {
    int space_intervals = 400;  // internal uniform z grid on [0, x_max]
    int time_refine = 2;        // internal time grid has n * time_refine nodes
    int diag_levels = 30;
    double tol_solve = 0.02, tol_cross = 0.03, tol_consistency = 0.01, tail_tol = 0.01;
    // interior window for residual checks; the first boundary_cells internal cells next to x = 0 are excluded
    double check_t_min = 0.05, check_x_min = 0.05, check_x_max = INFINITY;
    int boundary_cells = 6;
    // the internal march starts at a time whose half spread (P(X_t > x) = P(X_t > 0)/2) is below this many cells
    double start_cells = 0.5;
    double transition_cells = 8;  // below this half spread consecutive internal nodes differ by at most a factor 1.5
    ProfileOptions profile;
};

// q*_u = b(u) delta_0 + piecewise-linear density on [0, X] + mass T(u) beyond X
struct InternalField {
    TimeGrid tg;   // internal nodes, refined from the user grid
    double h = 0;  // z spacing
    int M = 0;
    std::vector<std::vector<double>> Q;  // nodal values
    std::vector<double> S, T, b;         // resolved mass (PL + tail), tail mass, unresolved mass at 0
    std::vector<std::size_t> user_index; // internal index of each user time node
    double z(int j) const { return j * h; }
    double X() const { return M * h; }
};

struct ResidualReport {
    double residual_defining = 0, residual_cross = 0;
    double worst_t_defining = 0, worst_x_defining = 0, worst_t_cross = 0, worst_x_cross = 0;
    std::vector<double> per_t_defining, per_t_cross;  // per user time node (NaN outside the window)
};

struct QStarSolution {
    Field2D q;  // on the user grid
    InternalField in;
    SingularProfile m_profile;
    double d_star = 0;
    ResidualReport residuals;
    std::vector<double> tail_fraction, unresolved_fraction;  // per user time
    std::vector<bool> tail_flags;                            // tail_fraction > tail_tol
};

QStarSolution solve_qstar(const Model& model, const TimeGrid& tg, const SpaceGrid& xg, const SolverOptions& opt = {});

// Both identities evaluated at cell midpoints of the internal z grid, user time nodes only.
ResidualReport compute_residuals(const Model& model, const QStarSolution& sol, const SolverOptions& opt);

ExcursionFunctions excursion_mass(const QStarSolution& sol, const SolverOptions& opt = {});
void solve_dual_tail(ExcursionFunctions& ex, const SolverOptions& opt = {});
double renewal_residual(const ExcursionFunctions& ex);
double scalar_mass_equation_check(const Model& model, const ExcursionFunctions& ex);

struct PipelineChecks {
    double renewal_residual = 0, scalar_mass = 0;
    double dual_symmetry = NAN;  // max |m/m_star - 1| for symmetric models
};

std::string diagnostics_json(const QStarSolution& sol, const ExcursionFunctions& ex, const PipelineChecks& c,
                             const SolverOptions& opt);

}  // namespace lf
