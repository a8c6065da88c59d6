#pragma once

#include <cstdint>
#include <vector>

#include "cbre/measures.hpp"
#include "cbre/rng.hpp"

namespace cbre {

// Characteristics of the environment Levy process xi: drift a, Brownian
// coefficient sigma, jump measure nu, and the small-jump truncation
// threshold used by the simulator. Derived integrals are cached eagerly so
// per-step work stays cheap.
class EnvLevyCharacteristics {
public:
    EnvLevyCharacteristics();  // degenerate: a = sigma = 0, nu empty
    EnvLevyCharacteristics(double a, double sigma, MeasureSpec nu, double eps_env);

    double a() const { return a_; }
    double sigma() const { return sigma_; }
    const MeasureSpec& nu() const { return nu_; }
    double eps_env() const { return eps_env_; }

    double beta() const { return beta_; }
    double big_rate() const { return big_rate_; }             // nu(|z| > eps)
    double compensator_xi() const { return comp_xi_; }        // int_{eps<|z|<=1} z nu
    double compensator_L() const { return comp_L_; }          // int_{eps<|z|<=1} (e^z-1) nu
    double small_jump_variance() const { return var_small_; } // int_{|z|<=eps} z^2 nu

private:
    double a_ = 0.0;
    double sigma_ = 0.0;
    MeasureSpec nu_;
    double eps_env_ = 1.0;
    double beta_ = 0.0;
    double big_rate_ = 0.0;
    double comp_xi_ = 0.0;
    double comp_L_ = 0.0;
    double var_small_ = 0.0;
};

// beta = a + sigma^2/2 + int_{[-1,1]} (e^z - 1 - z) nu(dz).
double compute_beta(const EnvLevyCharacteristics& chars);

// E[xi(1)] = a + int_{|z|>1} z nu(dz); small jumps are compensated.
double mean_xi1(const EnvLevyCharacteristics& chars);

struct EnvJump {
    double time;
    double z;
};

// One realized path of xi on a uniform grid, normalized to xi(0) = 0, with
// the retained noise needed to reconstruct L on the same filtration.
struct EnvironmentPath {
    double dt = 0.0;
    double horizon = 0.0;
    std::vector<double> xi;               // n+1 grid values, xi[0] = 0
    std::vector<double> brownian_dB;      // n increments
    std::vector<double> small_surrogate;  // n compensated small-jump terms
    std::vector<EnvJump> big_jumps;       // sorted by time, times in (0, T]
    std::uint64_t seed_tag = 0;

    std::size_t n_steps() const { return brownian_dB.size(); }
    double time_at(std::size_t i) const { return static_cast<double>(i) * dt; }
    std::size_t index_of(double t) const;  // throws unless t is a grid time
};

EnvironmentPath simulate_env(const EnvLevyCharacteristics& chars, double T, double dt,
                             Stream& stream);

// Path with xi identically zero (classical CB limit).
EnvironmentPath degenerate_env(double T, double dt);

// Increment of L over grid step i, rebuilt from the stored noise of xi.
double env_L_increment(const EnvironmentPath& path, const EnvLevyCharacteristics& chars,
                       std::size_t step_index);

// All n increments of L at once (precompute before replica loops).
std::vector<double> env_L_increments(const EnvironmentPath& path,
                                     const EnvLevyCharacteristics& chars);

// Merge groups of `factor` consecutive steps into one: same underlying
// noise on a coarser grid, for convergence studies.
EnvironmentPath coarsen(const EnvironmentPath& path, std::size_t factor);

}  // namespace cbre
