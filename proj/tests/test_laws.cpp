#include <cmath>

#include <doctest.h>

#include "cbre/errors.hpp"
#include "cbre/laws.hpp"
#include "cbre/parallel.hpp"

using namespace cbre;

namespace {

BranchingMechanism quadratic(double b, double c) {
    return BranchingMechanism(b, c, MeasureSpec::empty(MeasureKind::branching));
}

EnvLevyCharacteristics brownian_env(double sigma) {
    return EnvLevyCharacteristics(0.0, sigma, MeasureSpec::empty(MeasureKind::env), 1e-2);
}

}  // namespace

TEST_CASE("estimates and reports") {
    // 1, 2, 3, 4 -> mean 2.5, sample sd sqrt(5/3).
    const MCEstimate est = make_estimate(10.0, 30.0, 4);
    CHECK(est.value == doctest::Approx(2.5));
    CHECK(est.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(est.ci_lo() == doctest::Approx(est.value - 1.96 * est.std_error));
    CHECK_THROWS_AS(make_estimate(1.0, 1.0, 1), InvalidArgument);

    MCEstimate mc;
    mc.value = 0.52;
    mc.std_error = 0.01;
    mc.n = 100;
    const LawReport rep = make_report(0.5, 0.0, mc);
    CHECK(rep.z_score == doctest::Approx(2.0));
    CHECK(rep.pass);
    mc.value = 0.58;
    CHECK_FALSE(make_report(0.5, 0.0, mc).pass);
}

TEST_CASE("quenched laplace trivial cases") {
    const EnvLevyCharacteristics chars = brownian_env(0.4);
    Stream env_stream(31, StreamKind::env_path, 0);
    const EnvironmentPath env = simulate_env(chars, 0.5, 1e-2, env_stream);
    SimConfig cfg;
    cfg.dt = 1e-2;
    const BranchingMechanism bm = quadratic(0.3, 1.0);

    const LawReport at_zero = quenched_laplace(env, 1.0, bm, chars, 0.5, 0.0, 100, cfg, 31);
    CHECK(at_zero.analytic == 1.0);
    CHECK(at_zero.mc.value == 1.0);
    CHECK(at_zero.pass);

    const LawReport from_zero = quenched_laplace(env, 0.0, bm, chars, 0.5, 1.0, 100, cfg, 31);
    CHECK(from_zero.analytic == 1.0);
    CHECK(from_zero.mc.value == 1.0);
}

TEST_CASE("quenched dual engine at desk scale") {
    const EnvLevyCharacteristics chars = brownian_env(0.4);
    Stream env_stream(32, StreamKind::env_path, 0);
    const EnvironmentPath env = simulate_env(chars, 0.5, 1e-3, env_stream);
    SimConfig cfg;
    cfg.dt = 1e-3;
    const LawReport rep =
        quenched_laplace(env, 1.0, quadratic(0.3, 1.0), chars, 0.5, 1.0, 4000, cfg, 32);
    CHECK(rep.pass);
    CHECK(rep.analytic > 0.0);
    CHECK(rep.analytic < 1.0);
}

TEST_CASE("laplace values decrease in lambda") {
    const EnvLevyCharacteristics chars = brownian_env(0.4);
    Stream env_stream(33, StreamKind::env_path, 0);
    const EnvironmentPath env = simulate_env(chars, 0.5, 1e-2, env_stream);
    SimConfig cfg;
    cfg.dt = 1e-2;
    double prev = 1.1;
    for (double lam : {0.5, 1.0, 2.0, 4.0}) {
        const LawReport rep =
            quenched_laplace(env, 1.0, quadratic(0.3, 1.0), chars, 0.5, lam, 100, cfg, 33);
        CHECK(rep.analytic < prev);
        CHECK(rep.analytic >= 0.0);
        prev = rep.analytic;
    }
}

TEST_CASE("extinction with a linear mechanism never happens") {
    const EnvLevyCharacteristics chars = brownian_env(0.3);
    Stream env_stream(34, StreamKind::env_path, 0);
    const EnvironmentPath env = simulate_env(chars, 0.5, 1e-2, env_stream);
    SimConfig cfg;
    cfg.dt = 1e-2;
    const LawReport rep =
        extinction_quenched(env, 1.0, quadratic(1.0, 0.0), chars, 0.5, 2000, cfg, 34);
    CHECK(rep.analytic == 0.0);
    CHECK(rep.mc.value == 0.0);
    CHECK(rep.pass);
}

TEST_CASE("stationary law of the classical immigration model") {
    const EnvLevyCharacteristics chars;
    const BranchingMechanism bm = quadratic(1.0, 0.0);
    const ImmigrationMechanism im(1.0, MeasureSpec::empty(MeasureKind::immigration));
    const MCEstimate est = stationary_laplace(chars, bm, im, 1.0, 20.0, 1e-3, 2, 35, 1e-3);
    CHECK(est.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));

    // Heavy immigration tail trips the log-moment gate.
    const ImmigrationMechanism heavy(
        0.0, MeasureSpec(MeasureKind::immigration, {}, {PowerTail{1.0, 0.5, 1.0, +1}}));
    CHECK_THROWS_AS(stationary_laplace(chars, bm, heavy, 1.0, 20.0, 1e-3, 2, 35, 1e-3),
                    NotErgodic);
}

TEST_CASE("size-biased transform degenerates for linear mechanisms") {
    // c = 0, m empty: phi_0' vanishes and the correction integral is 0, so
    // the value is the plain annealed backward side exp(-x lam e^{-bt}).
    const EnvLevyCharacteristics chars;
    const MCEstimate est = sizebiased_laplace(chars, 2.0, quadratic(0.5, 0.0), 1.0, 1.0, 2, 1e-3, 36);
    CHECK(est.value == doctest::Approx(std::exp(-2.0 * std::exp(-0.5))).epsilon(1e-5));
}

TEST_CASE("survival estimate in the subcritical regime") {
    const EnvLevyCharacteristics chars = brownian_env(0.2);
    const SurvivalEstimate est =
        survival_longrun(chars, 1.0, quadratic(1.0, 1.0), {2.0, 4.0, 8.0, 16.0, 24.0}, 8, 1e-2, 37);
    CHECK(est.certain_extinction);
    CHECK(est.probability.value == doctest::Approx(1.0).epsilon(1e-2));
    CHECK_THROWS_AS(
        survival_longrun(chars, 1.0, quadratic(1.0, 0.0), {1.0, 2.0}, 4, 1e-2, 37),
        InvalidArgument);
}

TEST_CASE("deterministic parallel reduction") {
    set_threads(1);
    const double serial = parallel_sum(10000, [](std::size_t i) { return 1.0 / (1.0 + i); });
    set_threads(4);
    const double threaded = parallel_sum(10000, [](std::size_t i) { return 1.0 / (1.0 + i); });
    set_threads(0);
    CHECK(serial == threaded);
}
