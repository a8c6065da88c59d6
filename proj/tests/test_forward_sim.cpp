#include <cmath>

#include <doctest.h>

#include "cbre/errors.hpp"
#include "cbre/forward_sim.hpp"

using namespace cbre;

namespace {

BranchingMechanism quadratic(double b, double c) {
    return BranchingMechanism(b, c, MeasureSpec::empty(MeasureKind::branching));
}

}  // namespace

TEST_CASE("zero is absorbing") {
    const EnvironmentPath env = degenerate_env(1.0, 1e-2);
    const EnvLevyCharacteristics chars;
    SimConfig cfg;
    cfg.dt = 1e-2;
    Stream stream(1, StreamKind::branching, 0);
    const ProcessPath path = simulate_cbre(0.0, quadratic(0.5, 1.0), env, chars, cfg, stream);
    for (double v : path.values) CHECK(v == 0.0);
    REQUIRE(path.extinction_time.has_value());
    CHECK(*path.extinction_time == 0.0);
    CHECK(*hitting_time_zero(path) == 0.0);
}

TEST_CASE("linear drift reduces to the exponential decay ODE") {
    const EnvironmentPath env = degenerate_env(1.0, 1e-4);
    const EnvLevyCharacteristics chars;
    SimConfig cfg;
    cfg.dt = 1e-4;
    Stream stream(2, StreamKind::branching, 0);
    const ProcessPath path = simulate_cbre(2.0, quadratic(0.8, 0.0), env, chars, cfg, stream);
    CHECK(path.values.back() == doctest::Approx(2.0 * std::exp(-0.8)).epsilon(1e-3));
    CHECK_FALSE(path.extinction_time.has_value());
    CHECK_FALSE(hitting_time_zero(path).has_value());
}

TEST_CASE("pure drift immigration is exact") {
    const EnvironmentPath env = degenerate_env(2.0, 1e-2);
    const EnvLevyCharacteristics chars;
    SimConfig cfg;
    cfg.dt = 1e-2;
    cfg.absorb_at_zero = false;
    const ImmigrationMechanism im(1.0, MeasureSpec::empty(MeasureKind::immigration));
    Stream stream(3, StreamKind::immigration, 0);
    const ProcessPath path =
        simulate_cbire(0.5, quadratic(0.0, 0.0), im, env, chars, cfg, stream);
    CHECK(path.values.back() == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("trivial immigration coincides pathwise with the plain process") {
    const EnvLevyCharacteristics chars(0.0, 0.4, MeasureSpec::empty(MeasureKind::env), 1e-2);
    Stream env_stream(4, StreamKind::env_path, 0);
    const EnvironmentPath env = simulate_env(chars, 1.0, 1e-2, env_stream);
    SimConfig cfg;
    cfg.dt = 1e-2;
    const BranchingMechanism bm(
        0.2, 0.5, MeasureSpec(MeasureKind::branching, {{0.5, 1.0}}, {}));
    Stream s1(4, StreamKind::branching, 9);
    Stream s2(4, StreamKind::branching, 9);
    const ProcessPath a = simulate_cbre(1.0, bm, env, chars, cfg, s1);
    const ProcessPath b = simulate_cbire(1.0, bm, ImmigrationMechanism{}, env, chars, cfg, s2);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("coupling is monotone and degenerates correctly") {
    const EnvLevyCharacteristics chars(0.0, 0.3, MeasureSpec::empty(MeasureKind::env), 1e-2);
    Stream env_stream(5, StreamKind::env_path, 0);
    const EnvironmentPath env = simulate_env(chars, 1.0, 1e-2, env_stream);
    SimConfig cfg;
    cfg.dt = 1e-2;
    const BranchingMechanism bm = quadratic(0.5, 1.0);

    for (std::uint64_t k = 0; k < 20; ++k) {
        Stream base(5, StreamKind::coupling_base, k);
        Stream diff(5, StreamKind::coupling_diff, k);
        const auto [lower, upper] = simulate_coupled(0.4, 1.1, bm, env, chars, cfg, base, diff);
        for (std::size_t i = 0; i < lower.values.size(); ++i) {
            CHECK(upper.values[i] >= lower.values[i]);
        }
    }

    Stream base(5, StreamKind::coupling_base, 99);
    Stream diff(5, StreamKind::coupling_diff, 99);
    const auto [zero, gap] = simulate_coupled(0.0, 0.7, bm, env, chars, cfg, base, diff);
    for (double v : zero.values) CHECK(v == 0.0);
    CHECK(gap.values.front() == 0.7);
    CHECK_THROWS_AS(simulate_coupled(1.0, 0.5, bm, env, chars, cfg, base, diff),
                    InvalidArgument);
}

TEST_CASE("z transform") {
    const EnvLevyCharacteristics chars(0.1, 0.4, MeasureSpec::empty(MeasureKind::env), 1e-2);
    Stream env_stream(6, StreamKind::env_path, 0);
    const EnvironmentPath env = simulate_env(chars, 1.0, 1e-2, env_stream);
    SimConfig cfg;
    cfg.dt = 1e-2;
    Stream stream(6, StreamKind::branching, 0);
    const ProcessPath path = simulate_cbre(1.0, quadratic(0.0, 0.5), env, chars, cfg, stream);
    const std::vector<double> z = z_transform(path, env);
    for (std::size_t i = 0; i < z.size(); ++i) {
        CHECK(z[i] == doctest::Approx(path.values[i] * std::exp(-env.xi[i])));
    }
    const EnvironmentPath flat = degenerate_env(1.0, 1e-2);
    Stream stream2(6, StreamKind::branching, 1);
    const EnvLevyCharacteristics none;
    const ProcessPath p2 = simulate_cbre(1.0, quadratic(0.0, 0.5), flat, none, cfg, stream2);
    CHECK(z_transform(p2, flat) == p2.values);
}

TEST_CASE("generator closed forms") {
    const EnvLevyCharacteristics chars;
    const BranchingMechanism bm = quadratic(0.7, 0.0);
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };
    CHECK(generator_apply(bm, nullptr, chars, one, zero, zero, 2.0, 1e-10) == 0.0);

    // f(x) = x with a flat environment: Af = -b x.
    auto ident = [](double x) { return x; };
    auto unit = [](double) { return 1.0; };
    CHECK(generator_apply(bm, nullptr, chars, ident, unit, zero, 2.0, 1e-10) ==
          doctest::Approx(-1.4));

    // Environment atom: the two nu-integrals evaluated by hand for f(x)=x.
    const EnvLevyCharacteristics jumpy(
        0.0, 0.0, MeasureSpec(MeasureKind::env, {{0.5, 2.0}}, {}), 1e-2);
    const double x = 3.0;
    const double expect = (jumpy.beta() - bm.b) * x +
                          2.0 * (x * std::exp(0.5) - x - x * std::expm1(0.5));
    CHECK(generator_apply(bm, nullptr, jumpy, ident, unit, zero, x, 1e-10) ==
          doctest::Approx(expect).epsilon(1e-10));

    // Immigration drift adds h f'.
    const ImmigrationMechanism im(0.9, MeasureSpec::empty(MeasureKind::immigration));
    CHECK(generator_apply(bm, &im, chars, ident, unit, zero, 2.0, 1e-10) ==
          doctest::Approx(-1.4 + 0.9));
}

TEST_CASE("quenched branching property") {
    // Two independent replicas from x1 and x2 summed have the same quenched
    // law as one replica from x1 + x2 (checked through the Laplace
    // transform at modest replica counts).
    const EnvLevyCharacteristics chars(0.0, 0.4, MeasureSpec::empty(MeasureKind::env), 1e-2);
    Stream env_stream(7, StreamKind::env_path, 0);
    const EnvironmentPath env = simulate_env(chars, 0.5, 1e-3, env_stream);
    SimConfig cfg;
    cfg.dt = 1e-3;
    ForwardModel model(quadratic(0.3, 1.0), ImmigrationMechanism{}, chars, cfg);
    model.bind(env);
    const int n = 20000;
    const double lam = 1.0;
    double sum_pair = 0.0, sq_pair = 0.0, sum_single = 0.0, sq_single = 0.0;
    for (int i = 0; i < n; ++i) {
        Stream sa(7, StreamKind::branching, static_cast<std::uint64_t>(3 * i));
        Stream sb(7, StreamKind::branching, static_cast<std::uint64_t>(3 * i + 1));
        Stream sc(7, StreamKind::branching, static_cast<std::uint64_t>(3 * i + 2));
        const double pair = std::exp(
            -lam * (model.simulate(0.6, sa).values.back() + model.simulate(0.9, sb).values.back()));
        const double single = std::exp(-lam * model.simulate(1.5, sc).values.back());
        sum_pair += pair;
        sq_pair += pair * pair;
        sum_single += single;
        sq_single += single * single;
    }
    const double mean_pair = sum_pair / n;
    const double mean_single = sum_single / n;
    const double var = (sq_pair / n - mean_pair * mean_pair) +
                       (sq_single / n - mean_single * mean_single);
    const double se = std::sqrt(var / n);
    CHECK(std::abs(mean_pair - mean_single) < 4.0 * se);
}
