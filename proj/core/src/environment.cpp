#include "cbre/environment.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include "cbre/errors.hpp"

namespace cbre {

namespace {
constexpr double kQuadTol = 1e-12;
}

EnvLevyCharacteristics::EnvLevyCharacteristics()
    : nu_(MeasureSpec::empty(MeasureKind::env)) {}

EnvLevyCharacteristics::EnvLevyCharacteristics(double a, double sigma, MeasureSpec nu,
                                               double eps_env)
    : a_(a), sigma_(sigma), nu_(std::move(nu)), eps_env_(eps_env) {
    if (!(sigma_ >= 0.0)) throw InvalidArgument("environment sigma must be >= 0");
    if (!(eps_env_ > 0.0 && eps_env_ <= 1.0)) {
        throw InvalidArgument("eps_env must lie in (0, 1]");
    }
    if (nu_.kind() != MeasureKind::env) {
        throw InvalidArgument("environment measure must have kind=env");
    }
    if (!check_integrability(nu_, IntegrabilityTest::base)) {
        throw InvalidArgument("environment measure fails (1 ^ z^2)-integrability");
    }
    beta_ = a_ + 0.5 * sigma_ * sigma_ +
            integrate(nu_, [](double z) { return std::expm1(z) - z; }, kQuadTol, 0.0, 1.0);
    big_rate_ = nu_.is_empty() ? 0.0 : tail_mass(nu_, eps_env_);
    if (eps_env_ < 1.0) {
        comp_xi_ = integrate(nu_, [](double z) { return z; }, kQuadTol, eps_env_, 1.0);
        comp_L_ = integrate(nu_, [](double z) { return std::expm1(z); }, kQuadTol, eps_env_, 1.0);
    }
    var_small_ = integrate(nu_, [](double z) { return z * z; }, kQuadTol, 0.0, eps_env_);
}

double compute_beta(const EnvLevyCharacteristics& chars) { return chars.beta(); }

double mean_xi1(const EnvLevyCharacteristics& chars) {
    for (const auto& comp : chars.nu().components()) {
        if (const auto* p = std::get_if<PowerTail>(&comp)) {
            if (!(p->exponent > 1.0)) {
                throw MomentUndefined("environment power tail has no first moment");
            }
        } else if (const auto* s = std::get_if<StableSlab>(&comp)) {
            if (!(s->alpha > 1.0)) {
                throw MomentUndefined("environment stable slab has no first moment");
            }
        }
    }
    return chars.a() + integrate(chars.nu(), [](double z) { return z; }, kQuadTol, 1.0, kInf);
}

std::size_t EnvironmentPath::index_of(double t) const {
    const double pos = t / dt;
    const auto idx = static_cast<std::size_t>(std::llround(pos));
    if (idx > n_steps() || std::abs(pos - static_cast<double>(idx)) > 1e-9) {
        throw InvalidArgument("time is not a grid point of this environment path");
    }
    return idx;
}

EnvironmentPath simulate_env(const EnvLevyCharacteristics& chars, double T, double dt,
                             Stream& stream) {
    if (!(T > 0.0) || !(dt > 0.0)) throw InvalidArgument("simulate_env: T, dt must be > 0");
    const double steps_real = T / dt;
    const auto n = static_cast<std::size_t>(std::llround(steps_real));
    if (n == 0 || std::abs(steps_real - static_cast<double>(n)) > 1e-6) {
        throw InvalidArgument("simulate_env: dt must divide T");
    }

    EnvironmentPath path;
    path.dt = dt;
    path.horizon = T;
    path.xi.assign(n + 1, 0.0);
    path.brownian_dB.assign(n, 0.0);
    path.small_surrogate.assign(n, 0.0);

    const double sig_small = std::sqrt(chars.small_jump_variance() * dt);
    const double drift = (chars.a() - chars.compensator_xi()) * dt;

    // Fixed draw order per step: dB, surrogate, jump count, then per jump
    // (time, size). This is the replay convention for determinism.
    for (std::size_t i = 0; i < n; ++i) {
        const double t0 = static_cast<double>(i) * dt;
        const double dB = std::sqrt(dt) * stream.normal();
        path.brownian_dB[i] = dB;
        if (sig_small > 0.0) path.small_surrogate[i] = sig_small * stream.normal();
        double jump_sum = 0.0;
        if (chars.big_rate() > 0.0) {
            const std::uint64_t count = stream.poisson(chars.big_rate() * dt);
            const std::size_t first = path.big_jumps.size();
            for (std::uint64_t k = 0; k < count; ++k) {
                const double at = t0 + stream.uniform() * dt;
                const double z = sample_tail(chars.nu(), chars.eps_env(), stream);
                path.big_jumps.push_back({at, z});
                jump_sum += z;
            }
            std::sort(path.big_jumps.begin() + static_cast<std::ptrdiff_t>(first),
                      path.big_jumps.end(),
                      [](const EnvJump& x, const EnvJump& y) { return x.time < y.time; });
        }
        path.xi[i + 1] = path.xi[i] + drift + chars.sigma() * dB +
                         path.small_surrogate[i] + jump_sum;
    }
    return path;
}

EnvironmentPath degenerate_env(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw InvalidArgument("degenerate_env: T, dt must be > 0");
    const double steps_real = T / dt;
    const auto n = static_cast<std::size_t>(std::llround(steps_real));
    if (n == 0 || std::abs(steps_real - static_cast<double>(n)) > 1e-6) {
        throw InvalidArgument("degenerate_env: dt must divide T");
    }
    EnvironmentPath path;
    path.dt = dt;
    path.horizon = T;
    path.xi.assign(n + 1, 0.0);
    path.brownian_dB.assign(n, 0.0);
    path.small_surrogate.assign(n, 0.0);
    return path;
}

double env_L_increment(const EnvironmentPath& path, const EnvLevyCharacteristics& chars,
                       std::size_t step_index) {
    if (step_index >= path.n_steps()) throw InvalidArgument("env_L_increment: bad step index");
    const double t0 = path.time_at(step_index);
    const double t1 = path.time_at(step_index + 1);
    double jump_sum = 0.0;
    for (const auto& jump : path.big_jumps) {
        if (jump.time > t0 && jump.time <= t1) jump_sum += std::expm1(jump.z);
        if (jump.time > t1) break;
    }
    return (chars.beta() - chars.compensator_L()) * path.dt + chars.sigma() *
               path.brownian_dB[step_index] +
           path.small_surrogate[step_index] + jump_sum;
}

std::vector<double> env_L_increments(const EnvironmentPath& path,
                                     const EnvLevyCharacteristics& chars) {
    const std::size_t n = path.n_steps();
    std::vector<double> dL(n, 0.0);
    const double drift = (chars.beta() - chars.compensator_L()) * path.dt;
    for (std::size_t i = 0; i < n; ++i) {
        dL[i] = drift + chars.sigma() * path.brownian_dB[i] + path.small_surrogate[i];
    }
    for (const auto& jump : path.big_jumps) {
        auto idx = static_cast<std::size_t>(std::ceil(jump.time / path.dt)) - 1;
        if (idx >= n) idx = n - 1;
        dL[idx] += std::expm1(jump.z);
    }
    return dL;
}

EnvironmentPath coarsen(const EnvironmentPath& path, std::size_t factor) {
    if (factor == 0 || path.n_steps() % factor != 0) {
        throw InvalidArgument("coarsen: factor must divide the step count");
    }
    EnvironmentPath out;
    out.dt = path.dt * static_cast<double>(factor);
    out.horizon = path.horizon;
    out.seed_tag = path.seed_tag;
    const std::size_t n = path.n_steps() / factor;
    out.xi.resize(n + 1);
    out.brownian_dB.assign(n, 0.0);
    out.small_surrogate.assign(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) out.xi[i] = path.xi[i * factor];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < factor; ++k) {
            out.brownian_dB[i] += path.brownian_dB[i * factor + k];
            out.small_surrogate[i] += path.small_surrogate[i * factor + k];
        }
    }
    out.big_jumps = path.big_jumps;
    return out;
}

}  // namespace cbre
