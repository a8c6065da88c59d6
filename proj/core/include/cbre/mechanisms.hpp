#pragma once

#include "cbre/measures.hpp"

namespace cbre {

// phi(z) = b z + c z^2 + int_0^inf (e^{-uz} - 1 + uz) m(du).
struct BranchingMechanism {
    double b = 0.0;
    double c = 0.0;
    MeasureSpec m{MeasureSpec::empty(MeasureKind::branching)};

    BranchingMechanism() = default;
    BranchingMechanism(double b_, double c_, MeasureSpec m_);
};

// psi(lambda) = h lambda + int_0^inf (1 - e^{-lambda u}) n(du).
struct ImmigrationMechanism {
    double h = 0.0;
    MeasureSpec n{MeasureSpec::empty(MeasureKind::immigration)};

    ImmigrationMechanism() = default;
    ImmigrationMechanism(double h_, MeasureSpec n_);

    bool trivial() const { return h == 0.0 && n.is_empty(); }
};

double phi(const BranchingMechanism& bm, double z);
double phi_prime(const BranchingMechanism& bm, double z);
double phi0_prime(const BranchingMechanism& bm, double z);

double psi(const ImmigrationMechanism& im, double lam);

// Integral test int_1^inf dz/phi(z) < inf, decided from the family structure:
// quadratic or stable-slab parts force superlinear growth (holds); atoms,
// exponential densities and cut power tails contribute at most linear growth
// (fails). not_applicable flags phi taking non-positive values on [1,inf).
enum class GreyStatus { holds, fails, not_applicable };
GreyStatus greys_condition(const BranchingMechanism& bm);

}  // namespace cbre
