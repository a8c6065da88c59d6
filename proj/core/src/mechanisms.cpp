#include "cbre/mechanisms.hpp"

#include <cmath>
#include <variant>

#include "cbre/errors.hpp"

namespace cbre {

namespace {

constexpr double kQuadTol = 1e-12;

// e^{-x} - 1 + x, stable for small x.
inline double expm1_compensated(double x) {
    return std::expm1(-x) + x;
}

MeasureSpec single_component(MeasureKind kind, const MeasureComponent& comp) {
    return MeasureSpec(kind, {}, {comp});
}

}  // namespace

BranchingMechanism::BranchingMechanism(double b_, double c_, MeasureSpec m_)
    : b(b_), c(c_), m(std::move(m_)) {
    if (!(c >= 0.0)) throw InvalidArgument("branching mechanism needs c >= 0");
    if (m.kind() != MeasureKind::branching) {
        throw InvalidArgument("branching mechanism measure must have kind=branching");
    }
    if (!check_integrability(m, IntegrabilityTest::base)) {
        throw InvalidArgument("branching measure fails (z ^ z^2)-integrability");
    }
}

ImmigrationMechanism::ImmigrationMechanism(double h_, MeasureSpec n_)
    : h(h_), n(std::move(n_)) {
    if (!(h >= 0.0)) throw InvalidArgument("immigration mechanism needs h >= 0");
    if (n.kind() != MeasureKind::immigration) {
        throw InvalidArgument("immigration measure must have kind=immigration");
    }
    if (!check_integrability(n, IntegrabilityTest::base)) {
        throw InvalidArgument("immigration measure fails (1 ^ u)-integrability");
    }
}

double phi(const BranchingMechanism& bm, double z) {
    if (z < 0.0) throw InvalidArgument("phi: z must be >= 0");
    if (z == 0.0) return 0.0;
    double value = bm.b * z + bm.c * z * z;
    for (const auto& at : bm.m.atoms()) {
        value += at.mass * expm1_compensated(at.location * z);
    }
    for (const auto& comp : bm.m.components()) {
        if (const auto* e = std::get_if<ExponentialDensity>(&comp)) {
            // int (e^{-uz}-1+uz) M r e^{-ru} du = M z^2 / (r (r+z))
            value += e->total_mass * z * z / (e->rate * (e->rate + z));
        } else if (std::holds_alternative<PowerTail>(comp)) {
            value += integrate(single_component(MeasureKind::branching, comp),
                               [z](double u) { return expm1_compensated(u * z); }, kQuadTol);
        } else if (const auto* s = std::get_if<StableSlab>(&comp)) {
            if (!(s->alpha > 1.0 && s->alpha < 2.0)) {
                throw NumericalDomainError("stable branching slab needs alpha in (1,2)");
            }
            value += s->scale * std::tgamma(-s->alpha) * std::pow(z, s->alpha);
        }
    }
    return value;
}

double phi_prime(const BranchingMechanism& bm, double z) {
    if (z < 0.0) throw InvalidArgument("phi_prime: z must be >= 0");
    double value = bm.b + 2.0 * bm.c * z;
    if (z == 0.0) return value;
    for (const auto& at : bm.m.atoms()) {
        value += at.mass * at.location * (-std::expm1(-at.location * z));
    }
    for (const auto& comp : bm.m.components()) {
        if (const auto* e = std::get_if<ExponentialDensity>(&comp)) {
            const double r = e->rate;
            value += e->total_mass * z * (2.0 * r + z) / (r * (r + z) * (r + z));
        } else if (std::holds_alternative<PowerTail>(comp)) {
            value += integrate(single_component(MeasureKind::branching, comp),
                               [z](double u) { return u * (-std::expm1(-u * z)); }, kQuadTol);
        } else if (const auto* s = std::get_if<StableSlab>(&comp)) {
            if (!(s->alpha > 1.0 && s->alpha < 2.0)) {
                throw NumericalDomainError("stable branching slab needs alpha in (1,2)");
            }
            value += s->scale * s->alpha * std::tgamma(-s->alpha) * std::pow(z, s->alpha - 1.0);
        }
    }
    return value;
}

double phi0_prime(const BranchingMechanism& bm, double z) {
    return phi_prime(bm, z) - bm.b;
}

double psi(const ImmigrationMechanism& im, double lam) {
    if (lam < 0.0) throw InvalidArgument("psi: lambda must be >= 0");
    if (lam == 0.0) return 0.0;
    double value = im.h * lam;
    for (const auto& at : im.n.atoms()) {
        value += at.mass * (-std::expm1(-lam * at.location));
    }
    for (const auto& comp : im.n.components()) {
        if (const auto* e = std::get_if<ExponentialDensity>(&comp)) {
            value += e->total_mass * lam / (e->rate + lam);
        } else if (std::holds_alternative<PowerTail>(comp)) {
            value += integrate(single_component(MeasureKind::immigration, comp),
                               [lam](double u) { return -std::expm1(-lam * u); }, kQuadTol);
        } else if (const auto* s = std::get_if<StableSlab>(&comp)) {
            if (!(s->alpha < 1.0)) {
                throw NumericalDomainError("stable immigration slab needs alpha in (0,1)");
            }
            value += s->scale * std::tgamma(1.0 - s->alpha) / s->alpha * std::pow(lam, s->alpha);
        }
    }
    return value;
}

GreyStatus greys_condition(const BranchingMechanism& bm) {
    if (bm.c == 0.0 && bm.m.is_empty()) {
        // phi(z) = b z: positive linear growth diverges, b <= 0 never positive.
        return bm.b > 0.0 ? GreyStatus::fails : GreyStatus::not_applicable;
    }
    if (bm.b < 0.0 && !(phi(bm, 1.0) > 0.0)) {
        // phi convex with phi(0)=0: phi(1) <= 0 means it is non-positive
        // somewhere on [1,inf), so the integral test is ill-posed.
        return GreyStatus::not_applicable;
    }
    if (bm.c > 0.0) return GreyStatus::holds;
    for (const auto& comp : bm.m.components()) {
        if (std::holds_alternative<StableSlab>(comp)) return GreyStatus::holds;
    }
    // Atoms, exponential densities and cut power tails give phi(z) = O(z).
    return GreyStatus::fails;
}

}  // namespace cbre
