#pragma once

#include <vector>

#include "cbre/environment.hpp"
#include "cbre/mechanisms.hpp"

namespace cbre {

// Backward solution r -> u^xi_{r,t}(lambda) on the grid points r_index..t_index.
struct CumulantSolution {
    const EnvironmentPath* env = nullptr;
    std::size_t r_index = 0;
    std::size_t t_index = 0;
    double lambda = 0.0;
    double tol = 0.0;
    std::vector<double> u_values;  // u_values[k] = u at grid index r_index + k

    double at_index(std::size_t grid_index) const { return u_values[grid_index - r_index]; }
    double value() const { return u_values.front(); }  // u at r
};

struct ExtinctionFunctional {
    const EnvironmentPath* env = nullptr;
    double t = 0.0;
    double u_bar = 0.0;  // +inf sentinel when Grey's condition fails
    std::vector<double> lambda_ladder;
    bool converged = false;
};

// du/dr = e^{xi(r)} phi(e^{-xi(r)} u), terminal u(t) = lambda; xi frozen at
// its post-jump grid value inside each step; RK4 with per-step Richardson
// sub-stepping, switching to the reciprocal variable when u is large.
CumulantSolution solve_u(const EnvironmentPath& env, double r, double t, double lam,
                         const BranchingMechanism& bm, double tol);

// v via the transform e^{-xi(r)} u_{r,t}(e^{xi(t)} lambda), cross-checked
// against direct backward integration of the v-equation.
double solve_v(const EnvironmentPath& env, double r, double t, double lam,
               const BranchingMechanism& bm, double tol);

// Full curve of v_{s,t}(lambda) for grid s in [r, t] (transform route only).
std::vector<double> solve_v_curve(const EnvironmentPath& env, double r, double t, double lam,
                                  const BranchingMechanism& bm, double tol);

// |u_{r,t} - u_{r,s} o u_{s,t}| at lambda.
double flow_residual(const EnvironmentPath& env, double r, double s, double t, double lam,
                     const BranchingMechanism& bm, double tol);

// Max residual of the discretized backward stochastic equation for v over r.
double bsde_residual(const EnvironmentPath& env, const EnvLevyCharacteristics& chars,
                     double lam, double t, const BranchingMechanism& bm);

// u-bar = lim_{lambda->inf} u_{0,t}(lambda) along the ladder lambda_k = 10^k.
ExtinctionFunctional extinction_u_bar(const EnvironmentPath& env, double t,
                                      const BranchingMechanism& bm, double tol);

// int_0^T psi(v_{s,T}(lambda)) ds by trapezoid; stands in for the
// (-inf, 0] integral of the stationary law by time homogeneity.
double stationary_exponent(const EnvironmentPath& env, const EnvLevyCharacteristics& chars,
                           double lam, const BranchingMechanism& bm,
                           const ImmigrationMechanism& im, double tol);

}  // namespace cbre
