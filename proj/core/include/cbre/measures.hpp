#pragma once

#include <functional>
#include <limits>
#include <variant>
#include <vector>

#include "cbre/rng.hpp"

namespace cbre {

enum class MeasureKind { env, branching, immigration };
enum class IntegrabilityTest { base, xlogx_branching, log_immigration };

// Point mass at a nonzero location.
struct Atom {
    double location = 0.0;
    double mass = 0.0;
};

// total_mass * rate * exp(-rate*|z|) on the half-line chosen by sign.
struct ExponentialDensity {
    double total_mass = 0.0;
    double rate = 0.0;
    int sign = +1;
};

// scale * |z|^{-1-exponent} for |z| > lower_cut, on the half-line chosen by sign.
struct PowerTail {
    double scale = 0.0;
    double exponent = 0.0;
    double lower_cut = 0.0;
    int sign = +1;
};

// scale * z^{-1-alpha} on all of (0,inf); infinite activity near zero.
struct StableSlab {
    double scale = 0.0;
    double alpha = 0.0;
};

using MeasureComponent = std::variant<ExponentialDensity, PowerTail, StableSlab>;

// A jump measure as atoms plus parametric pieces. Immutable after
// construction; every operation is pure given an external random stream.
class MeasureSpec {
public:
    MeasureSpec() = default;  // empty measure, kind env
    MeasureSpec(MeasureKind kind, std::vector<Atom> atoms,
                std::vector<MeasureComponent> components);

    static MeasureSpec empty(MeasureKind kind);

    MeasureKind kind() const { return kind_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<MeasureComponent>& components() const { return components_; }
    bool is_empty() const { return atoms_.empty() && components_.empty(); }

private:
    MeasureKind kind_ = MeasureKind::env;
    std::vector<Atom> atoms_;
    std::vector<MeasureComponent> components_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Integral of f against the measure restricted to lo_abs < |z| <= hi_abs.
// Absolute quadrature error <= tol per parametric component.
double integrate(const MeasureSpec& spec, const std::function<double(double)>& f,
                 double tol, double lo_abs = 0.0, double hi_abs = kInf);

// Mass of { z : |z| > eps }.
double tail_mass(const MeasureSpec& spec, double eps);

// One draw from the normalized restriction to { |z| > eps }.
double sample_tail(const MeasureSpec& spec, double eps, Stream& rng);

// Analytic per-family decision; never numerical.
bool check_integrability(const MeasureSpec& spec, IntegrabilityTest test);

}  // namespace cbre
