#include "cbre/laws.hpp"

#include <algorithm>
#include <cmath>

#include "cbre/errors.hpp"
#include "cbre/parallel.hpp"

namespace cbre {

namespace {

constexpr double kSolveTol = 1e-8;

double trapezoid(const std::vector<double>& values, double dt) {
    if (values.size() < 2) return 0.0;
    double total = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) total += values[i];
    return total * dt;
}

// Deterministic parallel ensemble: per-replica statistics land in a buffer
// and are reduced in index order, so results do not depend on worker count.
template <class Statistic>
MCEstimate ensemble(const ForwardModel& model, double x0, std::size_t n, std::uint64_t seed,
                    StreamKind kind, std::uint64_t offset, Statistic&& stat) {
    std::vector<double> buffer(n, 0.0);
    parallel_chunks(
        n,
        [&](std::size_t i) {
            Stream stream(seed, kind, offset + i);
            buffer[i] = stat(model.simulate(x0, stream));
        },
        nullptr);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double v : buffer) {
        sum += v;
        sum_sq += v * v;
    }
    return make_estimate(sum, sum_sq, n);
}

MCEstimate cluster_estimate(const std::vector<double>& group_means) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double g : group_means) {
        sum += g;
        sum_sq += g * g;
    }
    return make_estimate(sum, sum_sq, group_means.size());
}

double cbire_backward_exponent(const EnvironmentPath& env, double x0,
                               const BranchingMechanism& bm, const ImmigrationMechanism& im,
                               double t, double lam) {
    const std::vector<double> v = solve_v_curve(env, 0.0, t, lam, bm, kSolveTol);
    std::vector<double> psi_curve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) psi_curve[i] = psi(im, v[i]);
    return x0 * v.front() + trapezoid(psi_curve, env.dt);
}

}  // namespace

MCEstimate make_estimate(double sum, double sum_sq, std::size_t n) {
    if (n < 2) throw InvalidArgument("MCEstimate needs n >= 2");
    MCEstimate est;
    est.n = n;
    est.value = sum / static_cast<double>(n);
    const double var =
        std::max(0.0, (sum_sq - static_cast<double>(n) * est.value * est.value) /
                          static_cast<double>(n - 1));
    est.std_error = std::sqrt(var / static_cast<double>(n));
    return est;
}

LawReport make_report(double analytic, double analytic_se, const MCEstimate& mc) {
    LawReport report;
    report.analytic = analytic;
    report.analytic_se = analytic_se;
    report.mc = mc;
    const double pooled = std::hypot(mc.std_error, analytic_se);
    const double diff = mc.value - analytic;
    if (pooled > 0.0) {
        report.z_score = diff / pooled;
    } else {
        report.z_score = diff == 0.0 ? 0.0 : std::copysign(kInf, diff);
    }
    report.pass = std::abs(report.z_score) <= 4.0;
    return report;
}

LawReport quenched_laplace(const EnvironmentPath& env, double x0, const BranchingMechanism& bm,
                           const EnvLevyCharacteristics& chars, double t, double lam,
                           std::size_t n_paths, const SimConfig& cfg, std::uint64_t seed) {
    const double analytic = std::exp(-x0 * solve_v(env, 0.0, t, lam, bm, kSolveTol));
    ForwardModel model(bm, ImmigrationMechanism{}, chars, cfg);
    model.bind(env);
    const std::size_t ti = env.index_of(t);
    const MCEstimate mc = ensemble(model, x0, n_paths, seed, StreamKind::branching, 0,
                                   [&](const ProcessPath& p) {
                                       return std::exp(-lam * p.values[ti]);
                                   });
    return make_report(analytic, 0.0, mc);
}

LawReport annealed_laplace(const EnvLevyCharacteristics& chars, double x0,
                           const BranchingMechanism& bm, double t, double lam,
                           std::size_t n_env, std::size_t n_paths_per_env,
                           std::size_t n_analytic, const SimConfig& cfg, std::uint64_t seed) {
    // Backward side: its own environment sample.
    std::vector<double> analytic_draws(n_analytic, 0.0);
    parallel_chunks(
        n_analytic,
        [&](std::size_t k) {
            Stream stream(seed, StreamKind::analytic_env, k);
            const EnvironmentPath env = simulate_env(chars, t, cfg.dt, stream);
            analytic_draws[k] = std::exp(-x0 * solve_v(env, 0.0, t, lam, bm, kSolveTol));
        },
        nullptr);
    const MCEstimate analytic = cluster_estimate(analytic_draws);

    // Forward side, clustered by environment.
    ForwardModel model(bm, ImmigrationMechanism{}, chars, cfg);
    std::vector<double> group(n_env, 0.0);
    MCEstimate single_env_mc{};
    for (std::size_t j = 0; j < n_env; ++j) {
        Stream env_stream(seed, StreamKind::env_path, j);
        const EnvironmentPath env = simulate_env(chars, t, cfg.dt, env_stream);
        model.bind(env);
        const std::size_t ti = env.index_of(t);
        const MCEstimate est = ensemble(model, x0, n_paths_per_env, seed,
                                        StreamKind::branching, j * n_paths_per_env,
                                        [&](const ProcessPath& p) {
                                            return std::exp(-lam * p.values[ti]);
                                        });
        group[j] = est.value;
        single_env_mc = est;
    }
    MCEstimate mc = n_env == 1 ? single_env_mc : cluster_estimate(group);
    return make_report(analytic.value, analytic.std_error, mc);
}

LawReport extinction_quenched(const EnvironmentPath& env, double x0,
                              const BranchingMechanism& bm,
                              const EnvLevyCharacteristics& chars, double t,
                              std::size_t n_paths, const SimConfig& cfg, std::uint64_t seed) {
    const ExtinctionFunctional ext = extinction_u_bar(env, t, bm, kSolveTol);
    const double analytic = ext.converged ? std::exp(-x0 * ext.u_bar) : 0.0;
    ForwardModel model(bm, ImmigrationMechanism{}, chars, cfg);
    model.bind(env);
    const std::size_t ti = env.index_of(t);
    const MCEstimate mc = ensemble(model, x0, n_paths, seed, StreamKind::branching, 0,
                                   [&](const ProcessPath& p) {
                                       return p.values[ti] == 0.0 ? 1.0 : 0.0;
                                   });
    LawReport report = make_report(analytic, 0.0, mc);
    if (analytic == 0.0) {
        // An absorbed state can never be un-absorbed, so a single extinct
        // replica refutes the backward side here.
        report.pass = mc.value == 0.0;
        report.z_score = mc.value == 0.0 ? 0.0 : kInf;
    }
    return report;
}

SurvivalEstimate survival_longrun(const EnvLevyCharacteristics& chars, double x0,
                                  const BranchingMechanism& bm,
                                  const std::vector<double>& t_ladder, std::size_t n_env,
                                  double dt, std::uint64_t seed) {
    if (t_ladder.empty()) throw InvalidArgument("survival_longrun: empty t ladder");
    if (greys_condition(bm) != GreyStatus::holds) {
        throw InvalidArgument("survival_longrun needs Grey's condition to hold");
    }
    SurvivalEstimate out;
    out.t_ladder = t_ladder;
    try {
        const double a1 = mean_xi1(chars);
        out.certain_extinction = a1 < bm.b || (a1 == bm.b && chars.sigma() > 0.0);
    } catch (const MomentUndefined&) {
        out.certain_extinction = false;
    }

    std::vector<double> draws(n_env, 0.0);
    for (std::size_t j = 0; j < n_env; ++j) {
        Stream stream(seed, StreamKind::analytic_env, j);
        const EnvironmentPath env = simulate_env(chars, t_ladder.back(), dt, stream);
        double u_bar = kInf;
        double prev = -1.0;
        bool stable = false;
        for (double t : t_ladder) {
            u_bar = extinction_u_bar(env, t, bm, 1e-6).u_bar;
            if (prev >= 0.0 && std::abs(u_bar - prev) <= 1e-4 * (1.0 + u_bar)) {
                stable = true;
                break;
            }
            prev = u_bar;
        }
        if (!stable) throw NoConvergence("u-bar did not stabilize along the t ladder");
        draws[j] = std::exp(-x0 * u_bar);
    }
    out.probability = cluster_estimate(draws);
    return out;
}

MCEstimate sizebiased_laplace(const EnvLevyCharacteristics& chars, double x0,
                              const BranchingMechanism& bm, double t, double lam,
                              std::size_t n_env, double dt, std::uint64_t seed) {
    std::vector<double> draws(n_env, 0.0);
    parallel_chunks(
        n_env,
        [&](std::size_t j) {
            Stream stream(seed, StreamKind::analytic_env, j);
            const EnvironmentPath env = simulate_env(chars, t, dt, stream);
            const std::vector<double> v = solve_v_curve(env, 0.0, t, lam, bm, kSolveTol);
            std::vector<double> correction(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) correction[i] = phi0_prime(bm, v[i]);
            draws[j] = std::exp(-x0 * v.front() - trapezoid(correction, dt));
        },
        nullptr);
    return cluster_estimate(draws);
}

LawReport cbire_laplace_quenched(const EnvironmentPath& env, double x0,
                                 const BranchingMechanism& bm, const ImmigrationMechanism& im,
                                 const EnvLevyCharacteristics& chars, double t, double lam,
                                 std::size_t n_paths, const SimConfig& cfg, std::uint64_t seed) {
    const double analytic = std::exp(-cbire_backward_exponent(env, x0, bm, im, t, lam));
    SimConfig sim = cfg;
    sim.absorb_at_zero = im.trivial();
    ForwardModel model(bm, im, chars, sim);
    model.bind(env);
    const std::size_t ti = env.index_of(t);
    const MCEstimate mc = ensemble(model, x0, n_paths, seed, StreamKind::branching, 0,
                                   [&](const ProcessPath& p) {
                                       return std::exp(-lam * p.values[ti]);
                                   });
    return make_report(analytic, 0.0, mc);
}

LawReport cbire_laplace(const EnvLevyCharacteristics& chars, double x0,
                        const BranchingMechanism& bm, const ImmigrationMechanism& im, double t,
                        double lam, std::size_t n_env, std::size_t n_paths_per_env,
                        std::size_t n_analytic, const SimConfig& cfg, std::uint64_t seed) {
    std::vector<double> analytic_draws(n_analytic, 0.0);
    parallel_chunks(
        n_analytic,
        [&](std::size_t k) {
            Stream stream(seed, StreamKind::analytic_env, k);
            const EnvironmentPath env = simulate_env(chars, t, cfg.dt, stream);
            analytic_draws[k] = std::exp(-cbire_backward_exponent(env, x0, bm, im, t, lam));
        },
        nullptr);
    const MCEstimate analytic = cluster_estimate(analytic_draws);

    SimConfig sim = cfg;
    sim.absorb_at_zero = im.trivial();
    ForwardModel model(bm, im, chars, sim);
    std::vector<double> group(n_env, 0.0);
    MCEstimate single_env_mc{};
    for (std::size_t j = 0; j < n_env; ++j) {
        Stream env_stream(seed, StreamKind::env_path, j);
        const EnvironmentPath env = simulate_env(chars, t, cfg.dt, env_stream);
        model.bind(env);
        const std::size_t ti = env.index_of(t);
        const MCEstimate est = ensemble(model, x0, n_paths_per_env, seed,
                                        StreamKind::branching, j * n_paths_per_env,
                                        [&](const ProcessPath& p) {
                                            return std::exp(-lam * p.values[ti]);
                                        });
        group[j] = est.value;
        single_env_mc = est;
    }
    MCEstimate mc = n_env == 1 ? single_env_mc : cluster_estimate(group);
    return make_report(analytic.value, analytic.std_error, mc);
}

MCEstimate stationary_laplace(const EnvLevyCharacteristics& chars, const BranchingMechanism& bm,
                              const ImmigrationMechanism& im, double lam, double T, double dt,
                              std::size_t n_env, std::uint64_t seed, double tol) {
    // Fail fast on the ergodicity preconditions, before any path work.
    if (!(mean_xi1(chars) < bm.b)) throw NotErgodic("requires E[xi(1)] < b");
    if (!check_integrability(im.n, IntegrabilityTest::log_immigration)) {
        throw NotErgodic("immigration measure fails the log-moment test");
    }
    std::vector<double> draws(n_env, 0.0);
    parallel_chunks(
        n_env,
        [&](std::size_t j) {
            Stream stream(seed, StreamKind::analytic_env, j);
            const EnvironmentPath env = simulate_env(chars, T, dt, stream);
            draws[j] = std::exp(-stationary_exponent(env, chars, lam, bm, im, tol));
        },
        nullptr);
    return cluster_estimate(draws);
}

CouplingReport strong_feller_gap(const EnvLevyCharacteristics& chars, double x, double y,
                                 double t, const BranchingMechanism& bm, std::size_t n_env,
                                 std::size_t n_couplings, const SimConfig& cfg,
                                 std::uint64_t seed) {
    if (!(x <= y)) throw InvalidArgument("strong_feller_gap: need x <= y");
    const bool grey_holds = greys_condition(bm) == GreyStatus::holds;
    ForwardModel model(bm, ImmigrationMechanism{}, chars, cfg);

    CouplingReport out;
    std::vector<double> analytic_draws(n_env, 0.0);
    std::vector<double> group(n_env, 0.0);
    for (std::size_t j = 0; j < n_env; ++j) {
        Stream env_stream(seed, StreamKind::env_path, j);
        const EnvironmentPath env = simulate_env(chars, t, cfg.dt, env_stream);
        if (grey_holds) {
            analytic_draws[j] =
                std::exp(-(y - x) * extinction_u_bar(env, t, bm, 1e-6).u_bar);
        }
        model.bind(env);
        std::vector<double> met(n_couplings, 0.0);
        std::vector<std::size_t> viol(n_couplings, 0);
        parallel_chunks(
            n_couplings,
            [&](std::size_t i) {
                const std::uint64_t idx = j * n_couplings + i;
                Stream base(seed, StreamKind::coupling_base, idx);
                Stream diff(seed, StreamKind::coupling_diff, idx);
                const auto [lower, upper] = model.simulate_coupled(x, y, base, diff);
                bool coalesced = false;
                for (std::size_t k = 0; k < lower.values.size(); ++k) {
                    if (upper.values[k] < lower.values[k]) ++viol[i];
                    if (upper.values[k] == lower.values[k]) {
                        coalesced = true;
                        break;
                    }
                }
                met[i] = coalesced ? 1.0 : 0.0;
            },
            nullptr);
        double count = 0.0;
        for (double v : met) count += v;
        for (std::size_t v : viol) out.monotonicity_violations += v;
        group[j] = count / static_cast<double>(n_couplings);
    }

    // Paired comparison: both sides share the environment sample, so the
    // z-score uses the per-environment differences.
    const MCEstimate analytic = cluster_estimate(analytic_draws);
    const MCEstimate mc = cluster_estimate(group);
    std::vector<double> diffs(n_env, 0.0);
    for (std::size_t j = 0; j < n_env; ++j) diffs[j] = group[j] - analytic_draws[j];
    const MCEstimate paired = cluster_estimate(diffs);
    out.report.analytic = analytic.value;
    out.report.analytic_se = analytic.std_error;
    out.report.mc = mc;
    if (paired.std_error > 0.0) {
        out.report.z_score = paired.value / paired.std_error;
    } else {
        out.report.z_score = paired.value == 0.0 ? 0.0 : std::copysign(kInf, paired.value);
    }
    out.report.pass = std::abs(out.report.z_score) <= 4.0;
    if (!grey_holds) out.report.pass = mc.value == 0.0;
    return out;
}

ErgodicReport ergodic_convergence(const EnvLevyCharacteristics& chars,
                                  const BranchingMechanism& bm, const ImmigrationMechanism& im,
                                  double lam, const std::vector<double>& x_values,
                                  const std::vector<double>& t_ladder, std::size_t n_env,
                                  std::size_t n_paths_per_env, const SimConfig& cfg,
                                  std::uint64_t seed) {
    if (x_values.empty() || t_ladder.empty()) {
        throw InvalidArgument("ergodic_convergence: empty x list or t ladder");
    }
    ErgodicReport out;
    out.x_values = x_values;
    out.t_ladder = t_ladder;
    const double T = t_ladder.back();
    out.stationary = stationary_laplace(chars, bm, im, lam, T, cfg.dt,
                                        std::max<std::size_t>(n_env, 2), seed ^ 0x5741u, 1e-5);

    SimConfig sim = cfg;
    sim.absorb_at_zero = im.trivial();
    ForwardModel model(bm, im, chars, sim);
    out.gaps.resize(x_values.size());
    out.forward.resize(x_values.size());
    for (std::size_t xi = 0; xi < x_values.size(); ++xi) {
        std::vector<std::vector<double>> group(t_ladder.size(),
                                               std::vector<double>(n_env, 0.0));
        std::vector<MCEstimate> single(t_ladder.size());
        for (std::size_t j = 0; j < n_env; ++j) {
            Stream env_stream(seed, StreamKind::env_path, j);
            const EnvironmentPath env = simulate_env(chars, T, cfg.dt, env_stream);
            model.bind(env);
            std::vector<std::size_t> t_idx(t_ladder.size());
            for (std::size_t k = 0; k < t_ladder.size(); ++k) t_idx[k] = env.index_of(t_ladder[k]);
            // One replica sweep yields every ladder time at once.
            std::vector<std::vector<double>> buffer(t_ladder.size(),
                                                    std::vector<double>(n_paths_per_env, 0.0));
            const std::uint64_t offset = (xi * n_env + j) * n_paths_per_env;
            parallel_chunks(
                n_paths_per_env,
                [&](std::size_t i) {
                    Stream stream(seed, StreamKind::branching, offset + i);
                    const ProcessPath p = model.simulate(x_values[xi], stream);
                    for (std::size_t k = 0; k < t_ladder.size(); ++k) {
                        buffer[k][i] = std::exp(-lam * p.values[t_idx[k]]);
                    }
                },
                nullptr);
            for (std::size_t k = 0; k < t_ladder.size(); ++k) {
                double sum = 0.0;
                double sum_sq = 0.0;
                for (double v : buffer[k]) {
                    sum += v;
                    sum_sq += v * v;
                }
                const MCEstimate est = make_estimate(sum, sum_sq, n_paths_per_env);
                group[k][j] = est.value;
                single[k] = est;
            }
        }
        out.forward[xi].resize(t_ladder.size());
        out.gaps[xi].resize(t_ladder.size());
        for (std::size_t k = 0; k < t_ladder.size(); ++k) {
            out.forward[xi][k] = n_env == 1 ? single[k] : cluster_estimate(group[k]);
            out.gaps[xi][k] = std::abs(out.forward[xi][k].value - out.stationary.value);
        }
    }

    // Initial-condition independence at the ladder end.
    const std::size_t last = t_ladder.size() - 1;
    for (std::size_t a = 0; a + 1 < x_values.size(); ++a) {
        for (std::size_t b = a + 1; b < x_values.size(); ++b) {
            const double gap = std::abs(out.forward[a][last].value - out.forward[b][last].value);
            // In deterministic configurations the std errors vanish and the
            // only residual is the O(dt^2) quadrature bias, hence the floor.
            const double floor = std::max(1e-9, cfg.dt * cfg.dt);
            const double se = std::max(
                std::hypot(out.forward[a][last].std_error, out.forward[b][last].std_error),
                floor);
            if (gap > 4.0 * se) {
                throw ErgodicityRefuted("ladder-end estimates disagree across initial states");
            }
        }
    }
    out.pass = true;
    for (std::size_t xi = 0; xi < x_values.size(); ++xi) {
        const double se = std::max(
            {std::hypot(out.forward[xi][last].std_error, out.stationary.std_error), 1e-9,
             cfg.dt * cfg.dt});
        if (out.gaps[xi][last] > 4.0 * se) out.pass = false;
        if (out.gaps[xi][last] > out.gaps[xi][0] + 4.0 * se) out.pass = false;
    }
    return out;
}

}  // namespace cbre
