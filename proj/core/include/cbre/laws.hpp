#pragma once

#include <cstdint>
#include <vector>

#include "cbre/cumulant.hpp"
#include "cbre/forward_sim.hpp"

namespace cbre {

struct MCEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;

    double ci_lo() const { return value - 1.96 * std_error; }
    double ci_hi() const { return value + 1.96 * std_error; }
};

MCEstimate make_estimate(double sum, double sum_sq, std::size_t n);

// Dual-engine comparison: `analytic` is the backward-solver side (possibly
// itself an environment average, hence analytic_se), `mc` the forward side.
struct LawReport {
    double analytic = 0.0;
    double analytic_se = 0.0;
    MCEstimate mc;
    double z_score = 0.0;
    bool pass = false;
};

LawReport make_report(double analytic, double analytic_se, const MCEstimate& mc);

enum class LawMode { quenched, annealed };

// Quenched Laplace transform of X(t) at lam on one fixed environment path:
// backward side exp(-x0 v_{0,t}(lam)) versus the forward Euler ensemble.
LawReport quenched_laplace(const EnvironmentPath& env, double x0, const BranchingMechanism& bm,
                           const EnvLevyCharacteristics& chars, double t, double lam,
                           std::size_t n_paths, const SimConfig& cfg, std::uint64_t seed);

// Annealed version; both sides are Monte Carlo (the backward side over its
// own, independent environment draws) and the z-score uses the pooled
// standard error. Forward-side uncertainty is clustered by environment.
LawReport annealed_laplace(const EnvLevyCharacteristics& chars, double x0,
                           const BranchingMechanism& bm, double t, double lam,
                           std::size_t n_env, std::size_t n_paths_per_env,
                           std::size_t n_analytic, const SimConfig& cfg, std::uint64_t seed);

// Extinction probability by time t. When Grey's condition fails the
// backward side is exactly 0 and the forward side must report 0 extinctions.
LawReport extinction_quenched(const EnvironmentPath& env, double x0,
                              const BranchingMechanism& bm,
                              const EnvLevyCharacteristics& chars, double t,
                              std::size_t n_paths, const SimConfig& cfg, std::uint64_t seed);

struct SurvivalEstimate {
    MCEstimate probability;      // P(extinction in finite time)
    bool certain_extinction = false;  // sufficient drift criterion
    std::vector<double> t_ladder;
};

// P(tau_0 < infinity) estimated by stabilizing u-bar along t_ladder per
// environment draw.
SurvivalEstimate survival_longrun(const EnvLevyCharacteristics& chars, double x0,
                                  const BranchingMechanism& bm,
                                  const std::vector<double>& t_ladder, std::size_t n_env,
                                  double dt, std::uint64_t seed);

// Size-biased transition Laplace transform (environment average of the
// exponential functional with the phi_0' correction).
MCEstimate sizebiased_laplace(const EnvLevyCharacteristics& chars, double x0,
                              const BranchingMechanism& bm, double t, double lam,
                              std::size_t n_env, double dt, std::uint64_t seed);

// With-immigration transform on a fixed environment path: backward side
// exp(-x0 v_{0,t} - int_0^t psi(v_{s,t}) ds) versus forward Euler.
LawReport cbire_laplace_quenched(const EnvironmentPath& env, double x0,
                                 const BranchingMechanism& bm, const ImmigrationMechanism& im,
                                 const EnvLevyCharacteristics& chars, double t, double lam,
                                 std::size_t n_paths, const SimConfig& cfg, std::uint64_t seed);

LawReport cbire_laplace(const EnvLevyCharacteristics& chars, double x0,
                        const BranchingMechanism& bm, const ImmigrationMechanism& im, double t,
                        double lam, std::size_t n_env, std::size_t n_paths_per_env,
                        std::size_t n_analytic, const SimConfig& cfg, std::uint64_t seed);

// Laplace transform of the stationary law, as an environment average of the
// truncated exponent; throws NotErgodic when the drift or log-moment
// preconditions fail.
MCEstimate stationary_laplace(const EnvLevyCharacteristics& chars, const BranchingMechanism& bm,
                              const ImmigrationMechanism& im, double lam, double T, double dt,
                              std::size_t n_env, std::uint64_t seed, double tol);

struct CouplingReport {
    LawReport report;
    std::size_t monotonicity_violations = 0;
};

// Coalescence probability of the monotone coupling versus the backward-side
// identity E[exp(-(y-x) u-bar_{0,t})].
CouplingReport strong_feller_gap(const EnvLevyCharacteristics& chars, double x, double y,
                                 double t, const BranchingMechanism& bm, std::size_t n_env,
                                 std::size_t n_couplings, const SimConfig& cfg,
                                 std::uint64_t seed);

struct ErgodicReport {
    MCEstimate stationary;
    std::vector<double> t_ladder;
    std::vector<double> x_values;
    // gaps[i][j] = |forward estimate at (x_values[i], t_ladder[j]) - stationary|
    std::vector<std::vector<double>> gaps;
    std::vector<std::vector<MCEstimate>> forward;
    bool pass = false;
};

// Convergence of the with-immigration semigroup to its stationary law,
// checked across initial conditions; cross-x disagreement at the ladder end
// throws ErgodicityRefuted.
ErgodicReport ergodic_convergence(const EnvLevyCharacteristics& chars,
                                  const BranchingMechanism& bm, const ImmigrationMechanism& im,
                                  double lam, const std::vector<double>& x_values,
                                  const std::vector<double>& t_ladder, std::size_t n_env,
                                  std::size_t n_paths_per_env, const SimConfig& cfg,
                                  std::uint64_t seed);

}  // namespace cbre
