#pragma once

#include <string>
#include <vector>

#include "levyfluct/entrance_law.hpp"

namespace lf {

struct SupremumSolution {
    Field2D f;                       // density of the running supremum on the user grid
    std::vector<double> atom_mass;   // P(sup = 0) per user time
    // mass balance per user time: atom + resolved + unresolved + tail = 1
    std::vector<double> resolved_mass, unresolved_mass, tail_mass;
    double h = 0;                              // internal z spacing
    std::vector<std::vector<double>> rows;     // f on the internal z grid [0, X]
    double mass_total(std::size_t k) const {
        return atom_mass[k] + resolved_mass[k] + unresolved_mass[k] + tail_mass[k];
    }
};

SupremumSolution supremum_density(const Model& model, const QStarSolution& qsol, const ExcursionFunctions& ex);

// d* n(t < zeta)
double atom_mass(const ExcursionFunctions& ex, double t);

struct TailEstimate {
    double value = 0;       // P(sup > x) from the resolved density plus the mass beyond the grid
    double unresolved = 0;  // mass held at the origin by the solver, counts only for x = 0
};
TailEstimate supremum_tail(const SupremumSolution& sol, std::size_t k, double x);

struct Reconstruction {
    Field2D p;
    Field2D truncated_fraction;  // estimated share of p lost by cutting the z integral at the grid edge
};
// p_t(x) for x > 0 from the entrance law of a symmetric model
Reconstruction reconstruct_p(const Model& model, const QStarSolution& qsol, const ExcursionFunctions& ex);

std::string mass_balance_json(const SupremumSolution& sol);

}  // namespace lf
