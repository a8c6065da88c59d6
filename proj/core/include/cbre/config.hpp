#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbre/environment.hpp"
#include "cbre/forward_sim.hpp"
#include "cbre/mechanisms.hpp"

namespace cbre {

// One experiment description, parsed and fully validated; see
// README.md for the field reference.
struct ExperimentConfig {
    std::string experiment;
    EnvLevyCharacteristics environment;
    BranchingMechanism branching;
    std::optional<ImmigrationMechanism> immigration;
    SimConfig sim;
    double horizon = 1.0;
    std::size_t n_paths = 10000;
    std::size_t n_env = 100;
    std::size_t n_analytic = 1000;
    std::vector<double> lambda_grid;
    std::vector<double> t_ladder;
    std::vector<double> x_values;
    std::uint64_t master_seed = 0;
    std::string output_dir = ".";
    std::string digest;  // FNV-1a of the config file bytes, hex
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace cbre
