#include "cbre/forward_sim.hpp"

#include <cmath>

#include "cbre/errors.hpp"

namespace cbre {

namespace {
constexpr double kQuadTol = 1e-12;
}

ForwardModel::ForwardModel(BranchingMechanism bm, ImmigrationMechanism im,
                           EnvLevyCharacteristics chars, SimConfig cfg)
    : bm_(std::move(bm)), im_(std::move(im)), chars_(std::move(chars)), cfg_(cfg) {
    if (!(cfg_.dt > 0.0)) throw InvalidArgument("SimConfig.dt must be > 0");
    if (!(cfg_.eps_branch > 0.0)) throw InvalidArgument("SimConfig.eps_branch must be > 0");
    const double eps = cfg_.eps_branch;
    c_eff_ = bm_.c;
    if (!bm_.m.is_empty()) {
        c_eff_ += 0.5 * integrate(bm_.m, [](double z) { return z * z; }, kQuadTol, 0.0, eps);
        big_rate_ = tail_mass(bm_.m, eps);
        if (big_rate_ > 0.0) {
            big_mean_ = integrate(bm_.m, [](double z) { return z; }, kQuadTol, eps, kInf);
        }
    }
    if (!im_.n.is_empty()) {
        im_big_rate_ = tail_mass(im_.n, eps);
        im_small_mean_ = integrate(im_.n, [](double u) { return u; }, kQuadTol, 0.0, eps);
    }
}

void ForwardModel::bind(const EnvironmentPath& env) {
    if (std::abs(env.dt - cfg_.dt) > 1e-12 * cfg_.dt) {
        throw InvalidArgument("environment grid step does not match SimConfig.dt");
    }
    env_ = &env;
    dL_ = env_L_increments(env, chars_);
}

ProcessPath ForwardModel::simulate(double x0, Stream& stream) const {
    if (env_ == nullptr) throw InvalidArgument("ForwardModel: bind an environment first");
    if (x0 < 0.0) throw InvalidArgument("initial state must be >= 0");
    const std::size_t n = env_->n_steps();
    const double dt = cfg_.dt;
    const bool has_im = !im_.trivial();

    ProcessPath path;
    path.dt = dt;
    path.env = env_;
    path.values.assign(n + 1, 0.0);
    path.values[0] = x0;

    double x = x0;
    if (x == 0.0) path.extinction_time = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (x == 0.0 && cfg_.absorb_at_zero && !has_im) break;  // values already 0
        double next = x;
        if (x > 0.0) {
            // Draw order per step: dW, branching count + sizes, immigration
            // count + sizes. Replay depends on this order only.
            const double dW = std::sqrt(dt) * stream.normal();
            next += -bm_.b * x * dt + std::sqrt(2.0 * c_eff_ * x) * dW + x * dL_[i];
            if (big_rate_ > 0.0) {
                const std::uint64_t count = stream.poisson(x * big_rate_ * dt);
                for (std::uint64_t k = 0; k < count; ++k) {
                    next += sample_tail(bm_.m, cfg_.eps_branch, stream);
                }
                next -= x * big_mean_ * dt;
            }
        }
        if (has_im) {
            next += (im_.h + im_small_mean_) * dt;
            if (im_big_rate_ > 0.0) {
                const std::uint64_t count = stream.poisson(im_big_rate_ * dt);
                for (std::uint64_t k = 0; k < count; ++k) {
                    next += sample_tail(im_.n, cfg_.eps_branch, stream);
                }
            }
        }
        x = std::max(0.0, next);
        if (!(x < cfg_.overflow_guard)) {
            path.exploded = true;
            for (std::size_t j = i + 1; j <= n; ++j) path.values[j] = cfg_.overflow_guard;
            return path;
        }
        path.values[i + 1] = x;
        if (x == 0.0 && !path.extinction_time) {
            path.extinction_time = env_->time_at(i + 1);
        }
    }
    return path;
}

std::pair<ProcessPath, ProcessPath> ForwardModel::simulate_coupled(double x0, double y0,
                                                                   Stream& base,
                                                                   Stream& diff) const {
    if (!(x0 <= y0)) throw InvalidArgument("simulate_coupled: need x0 <= y0");
    ProcessPath lower = simulate(x0, base);
    const ProcessPath gap = simulate(y0 - x0, diff);
    ProcessPath upper = lower;
    upper.extinction_time.reset();
    upper.exploded = lower.exploded || gap.exploded;
    for (std::size_t i = 0; i < upper.values.size(); ++i) {
        upper.values[i] = lower.values[i] + gap.values[i];
        if (upper.values[i] < lower.values[i]) {
            throw CouplingFault("upper path fell below the lower path");
        }
        if (upper.values[i] == 0.0 && !upper.extinction_time) {
            upper.extinction_time = static_cast<double>(i) * upper.dt;
        }
    }
    return {std::move(lower), std::move(upper)};
}

ProcessPath simulate_cbre(double x0, const BranchingMechanism& bm, const EnvironmentPath& env,
                          const EnvLevyCharacteristics& chars, const SimConfig& cfg,
                          Stream& stream) {
    ForwardModel model(bm, ImmigrationMechanism{}, chars, cfg);
    model.bind(env);
    return model.simulate(x0, stream);
}

ProcessPath simulate_cbire(double y0, const BranchingMechanism& bm,
                           const ImmigrationMechanism& im, const EnvironmentPath& env,
                           const EnvLevyCharacteristics& chars, const SimConfig& cfg,
                           Stream& stream) {
    ForwardModel model(bm, im, chars, cfg);
    model.bind(env);
    return model.simulate(y0, stream);
}

std::pair<ProcessPath, ProcessPath> simulate_coupled(double x0, double y0,
                                                     const BranchingMechanism& bm,
                                                     const EnvironmentPath& env,
                                                     const EnvLevyCharacteristics& chars,
                                                     const SimConfig& cfg, Stream& base,
                                                     Stream& diff) {
    ForwardModel model(bm, ImmigrationMechanism{}, chars, cfg);
    model.bind(env);
    return model.simulate_coupled(x0, y0, base, diff);
}

std::vector<double> z_transform(const ProcessPath& path, const EnvironmentPath& env) {
    if (path.values.size() != env.xi.size()) {
        throw InvalidArgument("z_transform: path and environment grids differ");
    }
    std::vector<double> z(path.values.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = path.values[i] * std::exp(-env.xi[i]);
    return z;
}

double generator_apply(const BranchingMechanism& bm, const ImmigrationMechanism* im,
                       const EnvLevyCharacteristics& chars,
                       const std::function<double(double)>& f,
                       const std::function<double(double)>& f1,
                       const std::function<double(double)>& f2, double x, double tol) {
    if (x < 0.0) throw InvalidArgument("generator_apply: x must be >= 0");
    const double fx = f(x);
    const double fpx = f1(x);
    const double fppx = f2(x);
    const double sigma = chars.sigma();
    double value = (chars.beta() - bm.b) * x * fpx + bm.c * x * fppx +
                   0.5 * sigma * sigma * x * x * fppx;
    if (!bm.m.is_empty()) {
        value += x * integrate(bm.m,
                               [&](double z) { return f(x + z) - fx - z * fpx; }, tol);
    }
    if (!chars.nu().is_empty()) {
        value += integrate(chars.nu(),
                           [&](double z) { return f(x * std::exp(z)) - fx - x * std::expm1(z) * fpx; },
                           tol, 0.0, 1.0);
        value += integrate(chars.nu(),
                           [&](double z) { return f(x * std::exp(z)) - fx; }, tol, 1.0, kInf);
    }
    if (im != nullptr && !im->trivial()) {
        value += im->h * fpx;
        if (!im->n.is_empty()) {
            value += integrate(im->n, [&](double u) { return f(x + u) - fx; }, tol);
        }
    }
    return value;
}

std::optional<double> hitting_time_zero(const ProcessPath& path) {
    return path.extinction_time;
}

}  // namespace cbre
