#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "cbre/errors.hpp"
#include "cbre/measures.hpp"

using namespace cbre;

namespace {

MeasureSpec single(MeasureKind kind, MeasureComponent comp) {
    return MeasureSpec(kind, {}, {std::move(comp)});
}

}  // namespace

TEST_CASE("atom integration is the weighted sum") {
    const MeasureSpec spec(MeasureKind::env, {{1.0, 2.0}}, {});
    CHECK(integrate(spec, [](double z) { return z * z; }, 1e-12) == doctest::Approx(2.0));
    CHECK(integrate(MeasureSpec::empty(MeasureKind::env), [](double) { return 1.0; }, 1e-12) ==
          0.0);
}

TEST_CASE("exponential density first moment") {
    const MeasureSpec spec = single(MeasureKind::branching, ExponentialDensity{1.0, 1.0, +1});
    const double v = integrate(spec, [](double z) { return z; }, 1e-10);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("integrate is linear and respects the window") {
    const MeasureSpec spec = single(MeasureKind::env, ExponentialDensity{2.0, 3.0, +1});
    auto f = [](double z) { return z; };
    auto g = [](double z) { return z * z; };
    const double a = integrate(spec, f, 1e-11);
    const double b = integrate(spec, g, 1e-11);
    const double both = integrate(spec, [&](double z) { return f(z) + g(z); }, 1e-11);
    CHECK(both == doctest::Approx(a + b).epsilon(1e-9));

    const double lo = integrate(spec, f, 1e-11, 0.0, 0.5);
    const double hi = integrate(spec, f, 1e-11, 0.5, kInf);
    CHECK(lo + hi == doctest::Approx(a).epsilon(1e-9));
}

TEST_CASE("tail masses") {
    const MeasureSpec atom(MeasureKind::env, {{1.0, 2.0}}, {});
    CHECK(tail_mass(atom, 0.5) == 2.0);
    CHECK(tail_mass(atom, 2.0) == 0.0);
    CHECK_THROWS_AS(tail_mass(atom, 0.0), InvalidArgument);

    const MeasureSpec slab = single(MeasureKind::branching, StableSlab{1.0, 0.5});
    CHECK(tail_mass(slab, 1.0) == doctest::Approx(2.0));

    const MeasureSpec expo = single(MeasureKind::env, ExponentialDensity{3.0, 2.0, -1});
    CHECK(tail_mass(expo, 0.5) == doctest::Approx(3.0 * std::exp(-1.0)));
}

TEST_CASE("sample_tail point mass and proportions") {
    const MeasureSpec atom(MeasureKind::env, {{1.0, 2.0}}, {});
    Stream rng(11, StreamKind::scratch, 0);
    CHECK(sample_tail(atom, 0.5, rng) == 1.0);

    const MeasureSpec two(MeasureKind::env, {{1.0, 1.0}, {2.0, 1.0}}, {});
    int ones = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) ones += sample_tail(two, 0.5, rng) == 1.0;
    CHECK(std::abs(ones / static_cast<double>(n) - 0.5) < 0.005);

    CHECK_THROWS_AS(sample_tail(atom, 3.0, rng), EmptyTail);
}

TEST_CASE("power-tail sampling matches the analytic law") {
    // CDF beyond the cut a is 1 - (a/z)^p; Kolmogorov distance at n=1e5.
    const double p = 1.5;
    const MeasureSpec spec = single(MeasureKind::env, PowerTail{1.0, p, 1.0, +1});
    Stream rng(12, StreamKind::scratch, 0);
    const int n = 100000;
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) draws[static_cast<std::size_t>(i)] = sample_tail(spec, 1.0, rng);
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = draws[static_cast<std::size_t>(i)];
        const double cdf = 1.0 - std::pow(1.0 / z, p);
        const double emp_hi = (i + 1) / static_cast<double>(n);
        const double emp_lo = i / static_cast<double>(n);
        ks = std::max({ks, std::abs(cdf - emp_hi), std::abs(cdf - emp_lo)});
    }
    CHECK(ks < 0.01);
}

TEST_CASE("construction rejects bad specs") {
    CHECK_THROWS_AS(MeasureSpec(MeasureKind::env, {{1.0, -2.0}}, {}), InvalidArgument);
    CHECK_THROWS_AS(MeasureSpec(MeasureKind::env, {{0.0, 1.0}}, {}), InvalidArgument);
    CHECK_THROWS_AS(MeasureSpec(MeasureKind::env, {{1.0, 1.0}, {1.0, 2.0}}, {}),
                    InvalidArgument);
    // Branching and immigration measures live on (0, inf).
    CHECK_THROWS_AS(MeasureSpec(MeasureKind::branching, {{-1.0, 1.0}}, {}), InvalidArgument);
    CHECK_THROWS_AS(single(MeasureKind::branching, StableSlab{1.0, 2.5}), InvalidArgument);
    CHECK_THROWS_AS(single(MeasureKind::env, ExponentialDensity{1.0, -1.0, +1}),
                    InvalidArgument);
}

TEST_CASE("integrability decisions are analytic") {
    // Cut power tails: the branching base test needs a first moment.
    CHECK(check_integrability(single(MeasureKind::branching, PowerTail{1.0, 1.5, 1.0, +1}),
                              IntegrabilityTest::base));
    CHECK_FALSE(check_integrability(single(MeasureKind::branching, PowerTail{1.0, 0.5, 1.0, +1}),
                                    IntegrabilityTest::base));
    CHECK(check_integrability(single(MeasureKind::env, PowerTail{1.0, 0.5, 1.0, +1}),
                              IntegrabilityTest::base));
    CHECK_FALSE(check_integrability(single(MeasureKind::branching, PowerTail{1.0, 1.0, 1.0, +1}),
                                    IntegrabilityTest::xlogx_branching));
    CHECK(check_integrability(single(MeasureKind::branching, PowerTail{1.0, 2.5, 1.0, +1}),
                              IntegrabilityTest::xlogx_branching));
    CHECK_FALSE(check_integrability(single(MeasureKind::immigration, PowerTail{1.0, 0.5, 1.0, +1}),
                                    IntegrabilityTest::log_immigration));

    // Stable slabs.
    CHECK(check_integrability(single(MeasureKind::branching, StableSlab{1.0, 1.5}),
                              IntegrabilityTest::base));
    CHECK_FALSE(check_integrability(single(MeasureKind::branching, StableSlab{1.0, 0.5}),
                                    IntegrabilityTest::base));
    CHECK(check_integrability(single(MeasureKind::immigration, StableSlab{1.0, 0.5}),
                              IntegrabilityTest::base));
    CHECK(check_integrability(MeasureSpec::empty(MeasureKind::immigration),
                              IntegrabilityTest::log_immigration));
}
