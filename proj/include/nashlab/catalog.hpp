#pragma once

#include <map>
#include <string>

#include "nashlab/model.hpp"

namespace nashlab {

using ParamMap = std::map<std::string, double>;

double param_or(const ParamMap& params, const std::string& key, double fallback);

/// Mean-field couplings shared between the N-player projections and the
/// limiting system, so both sides of a comparison run on identical data.
struct MFCouplings {
    std::function<double(double, double, const Measure&)> F, G;
    double L_f = 1.0;
    double L_g = 1.0;
    double L_label = 0.0;
};

/// Built-in cost families: "quadratic", "linear" (raw mode) and
/// "convex-quadratic-coupled", "sine-coupled" (symmetric mean-field mode).
/// There is no dynamic loading; configs select entries by name.
bool catalog_is_symmetric_mf(const std::string& name);
MFCouplings make_catalog_couplings(const std::string& name, const ParamMap& params);
CostFamily make_catalog_costs(const std::string& name, int players, const ParamMap& params);

/// Built-in Hamiltonians: "quadratic" and "anharmonic"
/// (H = p^2/2 - a cos p with a in [0, 1)).
HamiltonianSpec make_catalog_hamiltonian(const std::string& name, const ParamMap& params);

NashProblem make_catalog_problem(const std::string& cost_name, const std::string& ham_name,
                                 int players, const ParamMap& params);

}  // namespace nashlab
