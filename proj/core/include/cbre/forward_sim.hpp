#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "cbre/environment.hpp"
#include "cbre/mechanisms.hpp"

namespace cbre {

struct SimConfig {
    double dt = 1e-3;
    double eps_branch = 1e-2;   // branching/immigration small-jump threshold
    bool quenched = true;
    double overflow_guard = 1e300;
    bool absorb_at_zero = true;
};

struct ProcessPath {
    double dt = 0.0;
    std::vector<double> values;  // n+1 grid values, nonnegative
    std::optional<double> extinction_time;
    const EnvironmentPath* env = nullptr;
    std::uint64_t seed_tag = 0;
    bool exploded = false;

    std::size_t n_steps() const { return values.empty() ? 0 : values.size() - 1; }
    double final_value() const { return values.back(); }
};

// Euler scheme state shared across replicas: mechanism integrals are computed
// once, and the L-increments of one environment path are bound before the
// replica loop.
class ForwardModel {
public:
    ForwardModel(BranchingMechanism bm, ImmigrationMechanism im,
                 EnvLevyCharacteristics chars, SimConfig cfg);

    void bind(const EnvironmentPath& env);

    ProcessPath simulate(double x0, Stream& stream) const;
    std::pair<ProcessPath, ProcessPath> simulate_coupled(double x0, double y0,
                                                         Stream& base, Stream& diff) const;

    const BranchingMechanism& bm() const { return bm_; }
    const ImmigrationMechanism& im() const { return im_; }
    const SimConfig& cfg() const { return cfg_; }
    double c_eff() const { return c_eff_; }

private:
    BranchingMechanism bm_;
    ImmigrationMechanism im_;
    EnvLevyCharacteristics chars_;
    SimConfig cfg_;
    double c_eff_ = 0.0;        // c + (1/2) int_0^eps z^2 m(dz)
    double big_rate_ = 0.0;     // m((eps, inf)), per unit of state
    double big_mean_ = 0.0;     // int_{z>eps} z m(dz), compensator of the big part
    double im_big_rate_ = 0.0;  // n((eps, inf))
    double im_small_mean_ = 0.0;  // int_0^eps u n(du), drift surrogate
    const EnvironmentPath* env_ = nullptr;
    std::vector<double> dL_;
};

ProcessPath simulate_cbre(double x0, const BranchingMechanism& bm, const EnvironmentPath& env,
                          const EnvLevyCharacteristics& chars, const SimConfig& cfg,
                          Stream& stream);

ProcessPath simulate_cbire(double y0, const BranchingMechanism& bm,
                           const ImmigrationMechanism& im, const EnvironmentPath& env,
                           const EnvLevyCharacteristics& chars, const SimConfig& cfg,
                           Stream& stream);

// Monotone coupling: the upper path is the lower one plus an independent
// copy started from y0 - x0, so the gap is itself an absorbed process and
// coalescence is the gap's hitting time of zero.
std::pair<ProcessPath, ProcessPath> simulate_coupled(double x0, double y0,
                                                     const BranchingMechanism& bm,
                                                     const EnvironmentPath& env,
                                                     const EnvLevyCharacteristics& chars,
                                                     const SimConfig& cfg, Stream& base,
                                                     Stream& diff);

// Z(t_i) = X(t_i) e^{-xi(t_i)}.
std::vector<double> z_transform(const ProcessPath& path, const EnvironmentPath& env);

// Strong generator applied to a test function at x; pass nullptr for im to
// drop the immigration terms.
double generator_apply(const BranchingMechanism& bm, const ImmigrationMechanism* im,
                       const EnvLevyCharacteristics& chars,
                       const std::function<double(double)>& f,
                       const std::function<double(double)>& f1,
                       const std::function<double(double)>& f2, double x, double tol);

std::optional<double> hitting_time_zero(const ProcessPath& path);

}  // namespace cbre
