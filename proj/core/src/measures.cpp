#include "cbre/measures.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "cbre/errors.hpp"

namespace cbre {

namespace {

using Fn = std::function<double(double)>;

double quad(const std::function<double(double)>& g, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator(15);
    double err = 0.0, l1 = 0.0;
    auto wrapped = [&](double x) {
        const double v = g(x);
        if (!std::isfinite(v)) {
            throw NumericalDomainError("integrand returned a non-finite value");
        }
        return v;
    };
    const double result = integrator.integrate(wrapped, a, b, 1e-12, &err, &l1);
    if (err > tol && err > 1e-11 * std::max(1.0, std::abs(result))) {
        throw IntegrationFailure("quadrature error estimate above tolerance");
    }
    return result;
}

// Exponential piece restricted to lo < z <= hi (magnitudes).
double integrate_exp(const ExponentialDensity& e, const Fn& f, double tol,
                     double lo, double hi) {
    const double s = e.sign;
    const double a = std::max(lo, 0.0);
    if (hi <= a) return 0.0;
    if (std::isfinite(hi)) {
        return quad([&](double z) { return f(s * z) * e.total_mass * e.rate * std::exp(-e.rate * z); },
                    a, hi, tol);
    }
    // u = exp(-rate*(z-a)) maps (a,inf) to (0,1].
    const double pref = e.total_mass * std::exp(-e.rate * a);
    return pref * quad([&](double u) {
        if (u <= 0.0) return 0.0;
        return f(s * (a - std::log(u) / e.rate));
    }, 0.0, 1.0, tol / std::max(pref, 1e-300));
}

// Power-law piece restricted to lo < z <= hi.
double integrate_pow(const PowerTail& p, const Fn& f, double tol, double lo, double hi) {
    const double s = p.sign;
    const double a = std::max(lo, p.lower_cut);
    if (hi <= a) return 0.0;
    if (std::isfinite(hi)) {
        return quad([&](double z) { return f(s * z) * p.scale * std::pow(z, -1.0 - p.exponent); },
                    a, hi, tol);
    }
    if (!(p.exponent > 0.0)) {
        throw NumericalDomainError("PowerTail with exponent <= 0 has no finite tail integral");
    }
    // z = a/u maps (a,inf) to (0,1).
    const double pref = p.scale * std::pow(a, -p.exponent);
    return pref * quad([&](double u) {
        if (u <= 1e-14) return 0.0;  // convergent integrands vanish here
        return f(s * a / u) * std::pow(u, p.exponent - 1.0);
    }, 0.0, 1.0, tol / std::max(pref, 1e-300));
}

// Stable slab piece restricted to lo < z <= hi. Split at 1: the lower part
// uses z = e^{-y} with the integrand written as (f(z)/z^2) * z^{1-alpha} so
// the z -> 0 singularity never overflows for integrands with f = O(z^2).
double integrate_slab(const StableSlab& sl, const Fn& f, double tol, double lo, double hi) {
    double total = 0.0;
    const double split = 1.0;
    const double lo_hi = std::min(hi, split);
    if (lo < lo_hi) {
        const double y_hi = (lo > 0.0) ? std::min(-std::log(lo), 350.0) : 350.0;
        const double y_lo = -std::log(lo_hi);
        total += sl.scale * quad([&](double y) {
            const double z = std::exp(-y);
            const double ratio = f(z) / (z * z);
            return ratio * std::exp(-(2.0 - sl.alpha) * y);
        }, y_lo, y_hi, tol / std::max(sl.scale, 1e-300));
    }
    const double a = std::max(lo, split);
    if (hi > a) {
        if (std::isfinite(hi)) {
            total += quad([&](double z) { return f(z) * sl.scale * std::pow(z, -1.0 - sl.alpha); },
                          a, hi, tol);
        } else {
            const double pref = sl.scale * std::pow(a, -sl.alpha);
            total += pref * quad([&](double u) {
                if (u <= 1e-14) return 0.0;
                return f(a / u) * std::pow(u, sl.alpha - 1.0);
            }, 0.0, 1.0, tol / std::max(pref, 1e-300));
        }
    }
    return total;
}

}  // namespace

MeasureSpec::MeasureSpec(MeasureKind kind, std::vector<Atom> atoms,
                         std::vector<MeasureComponent> components)
    : kind_(kind), atoms_(std::move(atoms)), components_(std::move(components)) {
    const bool positive_only = kind_ != MeasureKind::env;
    for (const auto& at : atoms_) {
        if (!(at.mass > 0.0)) throw InvalidArgument("atom mass must be > 0");
        if (at.location == 0.0) throw InvalidArgument("atom location must be nonzero");
        if (positive_only && at.location < 0.0) {
            throw InvalidArgument("branching/immigration atoms live on (0,inf)");
        }
    }
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
            if (atoms_[i].location == atoms_[j].location) {
                throw InvalidArgument("atoms must sit at distinct locations");
            }
        }
    }
    for (const auto& comp : components_) {
        if (const auto* e = std::get_if<ExponentialDensity>(&comp)) {
            if (!(e->total_mass > 0.0)) throw InvalidArgument("exponential total_mass must be > 0");
            if (!(e->rate > 0.0)) throw InvalidArgument("exponential rate must be > 0");
            if (e->sign != 1 && e->sign != -1) throw InvalidArgument("sign must be +1 or -1");
            if (positive_only && e->sign < 0) {
                throw InvalidArgument("branching/immigration components live on (0,inf)");
            }
        } else if (const auto* p = std::get_if<PowerTail>(&comp)) {
            if (!(p->scale > 0.0)) throw InvalidArgument("power-tail scale must be > 0");
            if (!(p->lower_cut > 0.0)) throw InvalidArgument("power-tail lower_cut must be > 0");
            if (p->sign != 1 && p->sign != -1) throw InvalidArgument("sign must be +1 or -1");
            if (positive_only && p->sign < 0) {
                throw InvalidArgument("branching/immigration components live on (0,inf)");
            }
        } else if (const auto* s = std::get_if<StableSlab>(&comp)) {
            if (!(s->scale > 0.0)) throw InvalidArgument("stable slab scale must be > 0");
            if (!(s->alpha > 0.0 && s->alpha < 2.0)) {
                throw InvalidArgument("stable slab alpha must lie in (0,2)");
            }
        }
    }
}

MeasureSpec MeasureSpec::empty(MeasureKind kind) {
    return MeasureSpec(kind, {}, {});
}

double integrate(const MeasureSpec& spec, const Fn& f, double tol,
                 double lo_abs, double hi_abs) {
    if (!(tol > 0.0)) throw InvalidArgument("integrate: tol must be > 0");
    lo_abs = std::max(lo_abs, 0.0);
    double total = 0.0;
    for (const auto& at : spec.atoms()) {
        const double m = std::abs(at.location);
        if (m > lo_abs && m <= hi_abs) {
            const double v = f(at.location) * at.mass;
            if (!std::isfinite(v)) throw NumericalDomainError("integrand non-finite at atom");
            total += v;
        }
    }
    for (const auto& comp : spec.components()) {
        if (const auto* e = std::get_if<ExponentialDensity>(&comp)) {
            total += integrate_exp(*e, f, tol, lo_abs, hi_abs);
        } else if (const auto* p = std::get_if<PowerTail>(&comp)) {
            total += integrate_pow(*p, f, tol, lo_abs, hi_abs);
        } else if (const auto* s = std::get_if<StableSlab>(&comp)) {
            total += integrate_slab(*s, f, tol, lo_abs, hi_abs);
        }
    }
    return total;
}

double tail_mass(const MeasureSpec& spec, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("tail_mass: eps must be > 0");
    double total = 0.0;
    for (const auto& at : spec.atoms()) {
        if (std::abs(at.location) > eps) total += at.mass;
    }
    for (const auto& comp : spec.components()) {
        if (const auto* e = std::get_if<ExponentialDensity>(&comp)) {
            total += e->total_mass * std::exp(-e->rate * eps);
        } else if (const auto* p = std::get_if<PowerTail>(&comp)) {
            if (!(p->exponent > 0.0)) {
                throw NumericalDomainError("PowerTail with exponent <= 0 has infinite tail mass");
            }
            const double a = std::max(eps, p->lower_cut);
            total += p->scale * std::pow(a, -p->exponent) / p->exponent;
        } else if (const auto* s = std::get_if<StableSlab>(&comp)) {
            total += s->scale * std::pow(eps, -s->alpha) / s->alpha;
        }
    }
    return total;
}

double sample_tail(const MeasureSpec& spec, double eps, Stream& rng) {
    if (!(eps > 0.0)) throw InvalidArgument("sample_tail: eps must be > 0");
    struct Piece {
        double weight;
        const Atom* atom;
        const MeasureComponent* comp;
    };
    std::vector<Piece> pieces;
    double total = 0.0;
    for (const auto& at : spec.atoms()) {
        if (std::abs(at.location) > eps) {
            pieces.push_back({at.mass, &at, nullptr});
            total += at.mass;
        }
    }
    for (const auto& comp : spec.components()) {
        double w = 0.0;
        if (const auto* e = std::get_if<ExponentialDensity>(&comp)) {
            w = e->total_mass * std::exp(-e->rate * eps);
        } else if (const auto* p = std::get_if<PowerTail>(&comp)) {
            if (!(p->exponent > 0.0)) {
                throw NumericalDomainError("PowerTail with exponent <= 0 has infinite tail mass");
            }
            w = p->scale * std::pow(std::max(eps, p->lower_cut), -p->exponent) / p->exponent;
        } else if (const auto* s = std::get_if<StableSlab>(&comp)) {
            w = s->scale * std::pow(eps, -s->alpha) / s->alpha;
        }
        if (w > 0.0) {
            pieces.push_back({w, nullptr, &comp});
            total += w;
        }
    }
    if (!(total > 0.0)) throw EmptyTail("sample_tail: zero mass beyond eps");

    double pick = rng.uniform() * total;
    const Piece* chosen = &pieces.back();
    for (const auto& piece : pieces) {
        pick -= piece.weight;
        if (pick <= 0.0) {
            chosen = &piece;
            break;
        }
    }
    if (chosen->atom != nullptr) return chosen->atom->location;

    const double u = rng.uniform();
    if (const auto* e = std::get_if<ExponentialDensity>(chosen->comp)) {
        return e->sign * (eps - std::log(u) / e->rate);  // shifted exponential
    }
    if (const auto* p = std::get_if<PowerTail>(chosen->comp)) {
        const double a = std::max(eps, p->lower_cut);
        return p->sign * a * std::pow(u, -1.0 / p->exponent);
    }
    const auto& s = std::get<StableSlab>(*chosen->comp);
    return eps * std::pow(u, -1.0 / s.alpha);
}

bool check_integrability(const MeasureSpec& spec, IntegrabilityTest test) {
    for (const auto& comp : spec.components()) {
        if (const auto* p = std::get_if<PowerTail>(&comp)) {
            switch (test) {
                case IntegrabilityTest::base:
                    if (spec.kind() == MeasureKind::branching) {
                        if (!(p->exponent > 1.0)) return false;  // needs a first moment
                    } else {
                        if (!(p->exponent > 0.0)) return false;  // needs finite tail mass
                    }
                    break;
                case IntegrabilityTest::xlogx_branching:
                    if (!(p->exponent > 1.0)) return false;
                    break;
                case IntegrabilityTest::log_immigration:
                    if (!(p->exponent > 1.0)) return false;
                    break;
            }
        } else if (const auto* s = std::get_if<StableSlab>(&comp)) {
            switch (test) {
                case IntegrabilityTest::base:
                    if (spec.kind() == MeasureKind::branching && !(s->alpha > 1.0)) return false;
                    if (spec.kind() == MeasureKind::immigration && !(s->alpha < 1.0)) return false;
                    break;
                case IntegrabilityTest::xlogx_branching:
                    if (!(s->alpha > 1.0)) return false;
                    break;
                case IntegrabilityTest::log_immigration:
                    break;  // log moment is finite for every alpha in (0,2)
            }
        }
        // Atoms and exponential tails carry all moments.
    }
    return true;
}

}  // namespace cbre
