#include "cbre/cumulant.hpp"

#include <algorithm>
#include <cmath>

#include "cbre/errors.hpp"

namespace cbre {

namespace {

constexpr double kOverflowGuard = 1e300;
constexpr double kReciprocalSwitch = 1e3;

// One RK4 substep of du/dtau = -e^k phi(e^{-k} u) over step h, where k is
// the frozen xi value. Large states step in w = 1/u instead, which removes
// the stiffness of the singular backward blow-up profile.
double rk4_substep(double u, double h, double ek, double emk, const BranchingMechanism& bm) {
    auto f = [&](double x) { return -ek * phi(bm, std::max(0.0, x) * emk); };
    if (u > kReciprocalSwitch) {
        auto g = [&](double w) {
            if (w <= 0.0) throw SolutionDiverged("cumulant solution blew up");
            return ek * phi(bm, emk / w) * w * w;
        };
        const double w = 1.0 / u;
        const double g1 = g(w);
        const double g2 = g(w + 0.5 * h * g1);
        const double g3 = g(w + 0.5 * h * g2);
        const double g4 = g(w + h * g3);
        const double w_next = w + h / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
        if (w_next <= 0.0) throw SolutionDiverged("cumulant solution blew up");
        return 1.0 / w_next;
    }
    const double f1 = f(u);
    const double f2 = f(u + 0.5 * h * f1);
    const double f3 = f(u + 0.5 * h * f2);
    const double f4 = f(u + h * f3);
    return u + h / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
}

double integrate_substeps(double u_top, double dt, double ek, double emk,
                          const BranchingMechanism& bm, std::size_t n_sub) {
    double u = u_top;
    const double h = dt / static_cast<double>(n_sub);
    for (std::size_t i = 0; i < n_sub; ++i) {
        u = rk4_substep(u, h, ek, emk, bm);
        if (!(u < kOverflowGuard)) throw SolutionDiverged("cumulant solution exceeded guard");
    }
    return u;
}

// Integrate one grid step backward, doubling the substep count until two
// refinements agree to tol_step (mixed absolute/relative).
double backward_step(double u_top, double dt, double xi_value, const BranchingMechanism& bm,
                     double tol_step) {
    const double ek = std::exp(xi_value);
    const double emk = std::exp(-xi_value);
    double prev = integrate_substeps(u_top, dt, ek, emk, bm, 1);
    for (std::size_t n_sub = 2; n_sub <= (1u << 18); n_sub *= 2) {
        const double cur = integrate_substeps(u_top, dt, ek, emk, bm, n_sub);
        if (std::abs(cur - prev) <= tol_step * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    throw NoConvergence("backward step failed to converge under sub-stepping");
}

double clamp_positive(double u, double tol) {
    if (u < -tol) throw SolverFault("cumulant value went negative beyond tolerance");
    return std::max(0.0, u);
}

}  // namespace

CumulantSolution solve_u(const EnvironmentPath& env, double r, double t, double lam,
                         const BranchingMechanism& bm, double tol) {
    if (lam < 0.0) throw InvalidArgument("solve_u: lambda must be >= 0");
    if (!(tol > 0.0)) throw InvalidArgument("solve_u: tol must be > 0");
    const std::size_t ri = env.index_of(r);
    const std::size_t ti = env.index_of(t);
    if (ri > ti) throw InvalidArgument("solve_u: need r <= t");

    CumulantSolution sol;
    sol.env = &env;
    sol.r_index = ri;
    sol.t_index = ti;
    sol.lambda = lam;
    sol.tol = tol;
    sol.u_values.assign(ti - ri + 1, 0.0);
    sol.u_values.back() = lam;
    if (lam == 0.0 || ri == ti) return sol;

    const double span = static_cast<double>(ti - ri) * env.dt;
    const double tol_step = std::max(tol * env.dt / span, 1e-15);
    double u = lam;
    for (std::size_t i = ti; i-- > ri;) {
        u = clamp_positive(backward_step(u, env.dt, env.xi[i], bm, tol_step), tol);
        sol.u_values[i - ri] = u;
    }
    return sol;
}

std::vector<double> solve_v_curve(const EnvironmentPath& env, double r, double t, double lam,
                                  const BranchingMechanism& bm, double tol) {
    const std::size_t ti = env.index_of(t);
    const double lam_u = std::exp(env.xi[ti]) * lam;
    const CumulantSolution u_sol = solve_u(env, r, t, lam_u, bm, tol);
    std::vector<double> v(u_sol.u_values.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] = std::exp(-env.xi[u_sol.r_index + k]) * u_sol.u_values[k];
    }
    return v;
}

double solve_v(const EnvironmentPath& env, double r, double t, double lam,
               const BranchingMechanism& bm, double tol) {
    const std::vector<double> via_transform = solve_v_curve(env, r, t, lam, bm, tol);
    const double v_transform = via_transform.front();

    // Direct route: dv/dtau = -phi(v) inside a step, with the stored xi jump
    // factor applied at each step boundary.
    const std::size_t ri = env.index_of(r);
    const std::size_t ti = env.index_of(t);
    double v = lam;
    if (lam > 0.0 && ri < ti) {
        const double span = static_cast<double>(ti - ri) * env.dt;
        const double tol_step = std::max(tol * env.dt / span, 1e-15);
        for (std::size_t i = ti; i-- > ri;) {
            v *= std::exp(env.xi[i + 1] - env.xi[i]);
            v = clamp_positive(backward_step(v, env.dt, 0.0, bm, tol_step), tol);
        }
    }
    if (std::abs(v - v_transform) > 10.0 * tol * (1.0 + std::abs(v_transform))) {
        throw ConsistencyFault("transform and direct v-solutions disagree");
    }
    return v_transform;
}

double flow_residual(const EnvironmentPath& env, double r, double s, double t, double lam,
                     const BranchingMechanism& bm, double tol) {
    if (!(r <= s && s <= t)) throw InvalidArgument("flow_residual: need r <= s <= t");
    const double whole = solve_u(env, r, t, lam, bm, tol).value();
    const double inner = solve_u(env, s, t, lam, bm, tol).value();
    const double composed = solve_u(env, r, s, inner, bm, tol).value();
    return std::abs(whole - composed);
}

double bsde_residual(const EnvironmentPath& env, const EnvLevyCharacteristics& chars,
                     double lam, double t, const BranchingMechanism& bm) {
    const std::size_t ti = env.index_of(t);
    if (lam == 0.0) return 0.0;
    const std::vector<double> v = solve_v_curve(env, 0.0, t, lam, bm, 1e-10);
    const std::vector<double> dL = env_L_increments(env, chars);
    double sum_phi = 0.0;
    double sum_l = 0.0;
    double worst = 0.0;
    for (std::size_t i = ti; i-- > 0;) {
        sum_phi += phi(bm, v[i + 1]) * env.dt;
        sum_l += v[i + 1] * dL[i];
        worst = std::max(worst, std::abs(v[i] - (lam - sum_phi + sum_l)));
    }
    return worst;
}

ExtinctionFunctional extinction_u_bar(const EnvironmentPath& env, double t,
                                      const BranchingMechanism& bm, double tol) {
    ExtinctionFunctional out;
    out.env = &env;
    out.t = t;
    const GreyStatus grey = greys_condition(bm);
    if (grey == GreyStatus::not_applicable) {
        throw NumericalDomainError("Grey's test is not applicable to this mechanism");
    }
    if (grey == GreyStatus::fails) {
        out.u_bar = kInf;
        out.converged = false;
        return out;
    }
    double prev = -1.0;
    for (int k = 0; k <= 15; ++k) {
        const double lam = std::pow(10.0, k);
        out.lambda_ladder.push_back(lam);
        const double u = solve_u(env, 0.0, t, lam, bm, tol).value();
        if (k > 0 && std::abs(u - prev) <= tol * (1.0 + std::abs(u))) {
            out.u_bar = u;
            out.converged = true;
            return out;
        }
        prev = u;
    }
    throw NoConvergence("lambda ladder exhausted without convergence");
}

double stationary_exponent(const EnvironmentPath& env, const EnvLevyCharacteristics& chars,
                           double lam, const BranchingMechanism& bm,
                           const ImmigrationMechanism& im, double tol) {
    if (lam < 0.0) throw InvalidArgument("stationary_exponent: lambda must be >= 0");
    if (im.trivial() || lam == 0.0) return 0.0;
    const double a1 = mean_xi1(chars);
    if (!(a1 < bm.b)) throw NotErgodic("requires E[xi(1)] < b");
    if (!check_integrability(im.n, IntegrabilityTest::log_immigration)) {
        throw NotErgodic("immigration measure fails the log-moment test");
    }
    const double T = env.horizon;
    const double decay_horizon = 2.0 / (bm.b - a1);
    if (psi(im, lam * std::exp(0.5 * (a1 - bm.b) * T)) * decay_horizon >= tol) {
        throw TailNotNegligible("horizon too short for the requested tolerance");
    }
    const std::vector<double> v = solve_v_curve(env, 0.0, T, lam, bm, std::min(tol, 1e-9));
    double total = 0.5 * (psi(im, v.front()) + psi(im, v.back()));
    for (std::size_t i = 1; i + 1 < v.size(); ++i) total += psi(im, v[i]);
    return total * env.dt;
}

}  // namespace cbre
