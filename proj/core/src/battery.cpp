#include "cbre/battery.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "cbre/config.hpp"
#include "cbre/errors.hpp"
#include "cbre/laws.hpp"
#include "cbre/parallel.hpp"

namespace cbre {

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out << std::setprecision(6) << v;
    return out.str();
}

MeasureSpec atoms_env(std::vector<Atom> atoms) {
    return MeasureSpec(MeasureKind::env, std::move(atoms), {});
}

// 1. Degenerate environment, quadratic mechanism: u_{0,1}(1) = 1/(1+ct).
CriterionResult criterion_classical(std::uint64_t seed) {
    (void)seed;
    CriterionResult r{1, "classical-limit oracle", false, "", 0.0};
    const EnvironmentPath env = degenerate_env(1.0, 1e-3);
    const BranchingMechanism bm(0.0, 1.0, MeasureSpec::empty(MeasureKind::branching));
    const double u = solve_u(env, 0.0, 1.0, 1.0, bm, 1e-8).value();
    const double rel = std::abs(u - 0.5) / 0.5;
    r.pass = rel < 1e-6;
    r.detail = "u=" + fmt(u) + " rel_err=" + fmt(rel);
    return r;
}

// 2. Quadratic mechanism along random environments versus the explicit
// Riccati solution with the same step-frozen path.
CriterionResult criterion_riccati(std::uint64_t seed) {
    CriterionResult r{2, "riccati-under-environment oracle", false, "", 0.0};
    const double b = 0.3;
    const double c = 1.0;
    const double dt = 1e-4;
    const BranchingMechanism bm(b, c, MeasureSpec::empty(MeasureKind::branching));
    const EnvLevyCharacteristics chars(0.0, 0.5, atoms_env({{0.3, 1.0}, {-0.2, 1.0}}), 1e-2);
    double worst = 0.0;
    for (std::uint64_t j = 0; j < 50; ++j) {
        Stream stream(seed, StreamKind::env_path, j);
        const EnvironmentPath env = simulate_env(chars, 1.0, dt, stream);
        const double u = solve_u(env, 0.0, 1.0, 1.0, bm, 1e-7).value();
        double path_integral = 0.0;
        for (std::size_t i = 0; i < env.n_steps(); ++i) {
            const double t0 = env.time_at(i);
            const double t1 = env.time_at(i + 1);
            path_integral += std::exp(-env.xi[i]) * (std::exp(b * t1) - std::exp(b * t0)) / b;
        }
        const double oracle = 1.0 / (std::exp(b) / 1.0 + c * path_integral);
        worst = std::max(worst, std::abs(u - oracle) / oracle);
    }
    r.pass = worst < 1e-4;
    r.detail = "max_rel_err=" + fmt(worst);
    return r;
}

// 3. Semigroup/flow identity over random (r, s, t, lambda).
CriterionResult criterion_flow(std::uint64_t seed) {
    CriterionResult r{3, "flow property", false, "", 0.0};
    const double dt = 1e-3;
    const double tol = 1e-6;
    const BranchingMechanism bm(
        0.3, 1.0, MeasureSpec(MeasureKind::branching, {{0.5, 0.8}}, {}));
    const EnvLevyCharacteristics chars(0.0, 0.5, atoms_env({{0.3, 1.0}, {-0.2, 1.0}}), 1e-2);
    auto snap = [&](double t) { return std::round(t / dt) * dt; };
    double worst = 0.0;
    for (std::uint64_t j = 0; j < 10; ++j) {
        Stream env_stream(seed, StreamKind::env_path, 100 + j);
        const EnvironmentPath env = simulate_env(chars, 1.0, dt, env_stream);
        Stream pick(seed, StreamKind::scratch, j);
        for (int k = 0; k < 2; ++k) {
            const double rr = snap(pick.uniform() * 0.3);
            const double ss = snap(rr + 0.1 + pick.uniform() * 0.3);
            const double tt = snap(ss + 0.1 + pick.uniform() * (1.0 - ss - 0.1));
            const double lam = 0.1 + 1.9 * pick.uniform();
            worst = std::max(worst, flow_residual(env, rr, ss, tt, lam, bm, tol));
        }
    }
    r.pass = worst < 10.0 * tol;
    r.detail = "max_residual=" + fmt(worst);
    return r;
}

// 4. Backward-equation residual halves (roughly) with the grid step.
CriterionResult criterion_bsde(std::uint64_t seed) {
    CriterionResult r{4, "backward-equation refinement", false, "", 0.0};
    const BranchingMechanism bm(0.3, 2.0, MeasureSpec::empty(MeasureKind::branching));
    const EnvLevyCharacteristics chars(0.05, 0.1, atoms_env({{0.2, 0.5}, {-0.2, 0.5}}), 1e-2);
    std::vector<double> ratios;
    for (std::uint64_t j = 0; j < 20; ++j) {
        Stream stream(seed, StreamKind::env_path, 200 + j);
        const EnvironmentPath fine = simulate_env(chars, 1.0, 1e-3, stream);
        const EnvironmentPath coarse = coarsen(fine, 2);
        const double res_fine = bsde_residual(fine, chars, 2.0, 1.0, bm);
        const double res_coarse = bsde_residual(coarse, chars, 2.0, 1.0, bm);
        ratios.push_back(res_coarse / res_fine);
    }
    std::sort(ratios.begin(), ratios.end());
    const double median = 0.5 * (ratios[9] + ratios[10]);
    r.pass = median >= 1.5 && median <= 3.0;
    r.detail = "median_ratio=" + fmt(median);
    return r;
}

// 5. Forward ensemble against the backward transform on one fixed path.
CriterionResult criterion_quenched(std::uint64_t seed) {
    CriterionResult r{5, "quenched dual engine", false, "", 0.0};
    const BranchingMechanism bm(0.5, 1.0, MeasureSpec::empty(MeasureKind::branching));
    const EnvLevyCharacteristics chars(0.0, 0.5, atoms_env({{0.3, 1.0}, {-0.2, 1.0}}), 1e-2);
    SimConfig cfg;
    cfg.dt = 5e-4;
    Stream env_stream(seed, StreamKind::env_path, 300);
    const EnvironmentPath env = simulate_env(chars, 1.0, cfg.dt, env_stream);
    r.pass = true;
    for (double lam : {0.5, 1.0, 2.0}) {
        const LawReport rep = quenched_laplace(env, 1.0, bm, chars, 1.0, lam, 100000, cfg, seed);
        r.pass = r.pass && rep.pass;
        r.detail += "z(" + fmt(lam) + ")=" + fmt(rep.z_score) + " ";
    }
    return r;
}

// 6. Annealed version with environment-clustered errors on both sides.
CriterionResult criterion_annealed(std::uint64_t seed) {
    CriterionResult r{6, "annealed dual engine", false, "", 0.0};
    const BranchingMechanism bm(0.5, 1.0, MeasureSpec::empty(MeasureKind::branching));
    const EnvLevyCharacteristics chars(0.0, 0.5, atoms_env({{0.3, 1.0}, {-0.2, 1.0}}), 1e-2);
    SimConfig cfg;
    cfg.dt = 1e-3;
    const LawReport rep = annealed_laplace(chars, 1.0, bm, 1.0, 1.0, 200, 500, 10000, cfg, seed);
    r.pass = rep.pass;
    r.detail = "z=" + fmt(rep.z_score) + " analytic=" + fmt(rep.analytic) +
               " mc=" + fmt(rep.mc.value);
    return r;
}

// 7. e^{bt} X(t) e^{-xi(t)} has constant mean on one fixed path.
CriterionResult criterion_martingale(std::uint64_t seed) {
    CriterionResult r{7, "martingale check", false, "", 0.0};
    const BranchingMechanism bm(0.5, 1.0, MeasureSpec::empty(MeasureKind::branching));
    const EnvLevyCharacteristics chars(0.0, 0.5, atoms_env({{0.3, 1.0}, {-0.2, 1.0}}), 1e-2);
    SimConfig cfg;
    cfg.dt = 1e-3;
    Stream env_stream(seed, StreamKind::env_path, 400);
    const EnvironmentPath env = simulate_env(chars, 1.0, cfg.dt, env_stream);
    ForwardModel model(bm, ImmigrationMechanism{}, chars, cfg);
    model.bind(env);
    const double x0 = 1.0;
    const double weight = std::exp(bm.b * 1.0 - env.xi.back());
    const std::size_t n = 100000;
    std::vector<double> buffer(n, 0.0);
    parallel_chunks(
        n,
        [&](std::size_t i) {
            Stream stream(seed, StreamKind::branching, i);
            buffer[i] = weight * model.simulate(x0, stream).values.back() - x0;
        },
        nullptr);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double v : buffer) {
        sum += v;
        sum_sq += v * v;
    }
    const MCEstimate est = make_estimate(sum, sum_sq, n);
    r.pass = std::abs(est.value) <= 4.0 * est.std_error;
    r.detail = "mean=" + fmt(est.value) + " se=" + fmt(est.std_error);
    return r;
}

// 8. Extinction by t against exp(-x u-bar); a linear mechanism must show
// no extinctions at all.
CriterionResult criterion_extinction(std::uint64_t seed) {
    CriterionResult r{8, "extinction probabilities", false, "", 0.0};
    const EnvLevyCharacteristics chars(0.0, 0.3, MeasureSpec::empty(MeasureKind::env), 1e-2);
    {
        const BranchingMechanism bm(0.0, 1.0, MeasureSpec::empty(MeasureKind::branching));
        SimConfig cfg;
        cfg.dt = 1e-4;
        Stream env_stream(seed, StreamKind::env_path, 500);
        const EnvironmentPath env = simulate_env(chars, 1.0, cfg.dt, env_stream);
        const LawReport rep = extinction_quenched(env, 0.5, bm, chars, 1.0, 100000, cfg, seed);
        r.pass = rep.pass;
        r.detail = "quadratic_z=" + fmt(rep.z_score);
    }
    {
        const BranchingMechanism bm(1.0, 0.0, MeasureSpec::empty(MeasureKind::branching));
        SimConfig cfg;
        cfg.dt = 1e-3;
        Stream env_stream(seed, StreamKind::env_path, 501);
        const EnvironmentPath env = simulate_env(chars, 1.0, cfg.dt, env_stream);
        const LawReport rep = extinction_quenched(env, 1.0, bm, chars, 1.0, 100000, cfg, seed);
        r.pass = r.pass && rep.pass;
        r.detail += " linear_extinct_fraction=" + fmt(rep.mc.value);
    }
    return r;
}

// 9. Coalescence of the monotone coupling versus the backward identity.
CriterionResult criterion_coupling(std::uint64_t seed) {
    CriterionResult r{9, "strong-feller coupling", false, "", 0.0};
    const BranchingMechanism bm(1.0, 1.0, MeasureSpec::empty(MeasureKind::branching));
    const EnvLevyCharacteristics chars(0.0, 0.3, MeasureSpec::empty(MeasureKind::env), 1e-2);
    SimConfig cfg;
    cfg.dt = 1e-3;
    const CouplingReport rep =
        strong_feller_gap(chars, 0.3, 0.6, 2.0, bm, 10000, 100, cfg, seed);
    r.pass = rep.report.pass && rep.monotonicity_violations == 0;
    r.detail = "z=" + fmt(rep.report.z_score) + " analytic=" + fmt(rep.report.analytic) +
               " mc=" + fmt(rep.report.mc.value) +
               " violations=" + std::to_string(rep.monotonicity_violations);
    return r;
}

// 10. Short-time semigroup derivative against the generator.
CriterionResult criterion_generator(std::uint64_t seed) {
    CriterionResult r{10, "generator short-time check", false, "", 0.0};
    const BranchingMechanism bm(2.0, 0.1, MeasureSpec::empty(MeasureKind::branching));
    const EnvLevyCharacteristics chars(0.0, 0.1, MeasureSpec::empty(MeasureKind::env), 1e-2);
    const double x0 = 1.0;
    const double h = 1e-3;
    SimConfig cfg;
    cfg.dt = 1e-4;
    auto f = [](double x) { return std::exp(-x); };
    const double af = generator_apply(
        bm, nullptr, chars, f, [](double x) { return -std::exp(-x); },
        [](double x) { return std::exp(-x); }, x0, 1e-10);
    const ForwardModel base(bm, ImmigrationMechanism{}, chars, cfg);
    const std::size_t n = 1000000;
    std::vector<double> buffer(n, 0.0);
    parallel_chunks(
        n,
        [&](std::size_t i) {
            Stream env_stream(seed, StreamKind::env_path, i);
            const EnvironmentPath env = simulate_env(chars, h, cfg.dt, env_stream);
            ForwardModel model = base;
            model.bind(env);
            Stream stream(seed, StreamKind::branching, i);
            buffer[i] = f(model.simulate(x0, stream).values.back());
        },
        nullptr);
    double sum = 0.0;
    for (double v : buffer) sum += v;
    const double derivative = (sum / static_cast<double>(n) - f(x0)) / h;
    const double rel = std::abs(derivative - af) / std::abs(af);
    r.pass = rel < 0.05;
    r.detail = "mc_derivative=" + fmt(derivative) + " generator=" + fmt(af) +
               " rel_err=" + fmt(rel);
    return r;
}

// 11. Stationary law with immigration: analytic value, forward convergence
// across initial states, and the log-moment gate.
CriterionResult criterion_stationary(std::uint64_t seed) {
    CriterionResult r{11, "stationarity with immigration", false, "", 0.0};
    const EnvLevyCharacteristics chars;  // degenerate environment
    const BranchingMechanism bm(1.0, 0.0, MeasureSpec::empty(MeasureKind::branching));
    const ImmigrationMechanism im(1.0, MeasureSpec::empty(MeasureKind::immigration));
    const MCEstimate stat = stationary_laplace(chars, bm, im, 1.0, 30.0, 1e-3, 2, seed, 1e-5);
    const double target = std::exp(-1.0);
    const bool analytic_ok = std::abs(stat.value - target) < 1e-4;

    SimConfig cfg;
    cfg.dt = 1e-3;
    const ErgodicReport erg =
        ergodic_convergence(chars, bm, im, 1.0, {0.0, 10.0}, {5.0, 30.0}, 1, 2, cfg, seed);

    bool gate_ok = false;
    try {
        const ImmigrationMechanism heavy(
            0.0, MeasureSpec(MeasureKind::immigration, {}, {PowerTail{1.0, 0.5, 1.0, +1}}));
        stationary_laplace(chars, bm, heavy, 1.0, 30.0, 1e-3, 2, seed, 1e-5);
    } catch (const NotErgodic&) {
        gate_ok = true;
    }

    r.pass = analytic_ok && erg.pass && gate_ok;
    r.detail = "stationary=" + fmt(stat.value) + " gap_end=" + fmt(erg.gaps[1].back()) +
               " log_moment_gate=" + (gate_ok ? std::string("ok") : std::string("missed"));
    return r;
}

// 12. Same seed, different worker counts, byte-identical report.
CriterionResult criterion_determinism(std::uint64_t seed) {
    CriterionResult r{12, "determinism across thread counts", false, "", 0.0};
    const BranchingMechanism bm(0.3, 1.0, MeasureSpec::empty(MeasureKind::branching));
    const EnvLevyCharacteristics chars(0.0, 0.5, atoms_env({{0.3, 1.0}}), 1e-2);
    SimConfig cfg;
    cfg.dt = 1e-2;
    auto render = [&]() {
        const LawReport rep = annealed_laplace(chars, 1.0, bm, 0.5, 1.0, 8, 64, 16, cfg, seed);
        std::ostringstream out;
        out << std::setprecision(17) << rep.analytic << '|' << rep.analytic_se << '|'
            << rep.mc.value << '|' << rep.mc.std_error << '|' << rep.mc.n << '|'
            << rep.z_score << '|' << rep.pass;
        return out.str();
    };
    set_threads(1);
    const std::string serial = render();
    set_threads(3);
    const std::string threaded = render();
    set_threads(0);
    r.pass = serial == threaded;
    r.detail = r.pass ? "reports byte-identical" : "reports differ";
    return r;
}

}  // namespace

CriterionResult run_criterion(int id, std::uint64_t master_seed) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult result;
    switch (id) {
        case 1: result = criterion_classical(master_seed); break;
        case 2: result = criterion_riccati(master_seed); break;
        case 3: result = criterion_flow(master_seed); break;
        case 4: result = criterion_bsde(master_seed); break;
        case 5: result = criterion_quenched(master_seed); break;
        case 6: result = criterion_annealed(master_seed); break;
        case 7: result = criterion_martingale(master_seed); break;
        case 8: result = criterion_extinction(master_seed); break;
        case 9: result = criterion_coupling(master_seed); break;
        case 10: result = criterion_generator(master_seed); break;
        case 11: result = criterion_stationary(master_seed); break;
        case 12: result = criterion_determinism(master_seed); break;
        default: throw InvalidArgument("criterion id must be in 1..12");
    }
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<CriterionResult> run_battery(std::uint64_t master_seed) {
    std::vector<CriterionResult> results;
    results.reserve(12);
    for (int id = 1; id <= 12; ++id) results.push_back(run_criterion(id, master_seed));
    return results;
}

std::string format_result(const CriterionResult& result) {
    std::ostringstream out;
    out << "criterion " << std::setw(2) << result.id << " ["
        << (result.pass ? "pass" : "FAIL") << "] " << result.name << ": " << result.detail
        << " (" << std::setprecision(3) << result.seconds << "s)";
    return out.str();
}

}  // namespace cbre
