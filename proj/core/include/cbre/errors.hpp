#pragma once

#include <stdexcept>
#include <string>

namespace cbre {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument / configuration problems.
struct InvalidArgument : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// Quadrature and measure evaluation.
struct IntegrationFailure : Error { using Error::Error; };
struct NumericalDomainError : Error { using Error::Error; };
struct EmptyTail : Error { using Error::Error; };
struct MomentUndefined : Error { using Error::Error; };

// Backward solver.
struct SolutionDiverged : Error { using Error::Error; };
struct SolverFault : Error { using Error::Error; };
struct ConsistencyFault : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct TailNotNegligible : Error { using Error::Error; };

// Law-level preconditions.
struct NotErgodic : Error { using Error::Error; };
struct ErgodicityRefuted : Error { using Error::Error; };

// Forward simulator.
struct PathExploded : Error { using Error::Error; };
struct CouplingFault : Error { using Error::Error; };

}  // namespace cbre
