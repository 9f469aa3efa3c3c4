#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oploss/errors.hpp"
#include "oploss/freq.hpp"
#include "oploss/rng.hpp"
#include "oracles.hpp"

using oploss::FreqParams;
using oploss::PairCoupling;

namespace {

// Fixed pair used across the correlated-stream checks.
const PairCoupling kPair{{1.5, 1.3, 30.0}, {2.0, 0.75, 40.0}, 0.7};

double window_integral_of(const std::function<double(double)>& cov, double tw) {
    return oracles::integrate([&](double t) { return cov(t) * (tw - std::fabs(t)); }, -tw, tw,
                              1e-11);
}

}  // namespace

TEST_CASE("rate moments: mean a*tau*gamma, variance a^2*gamma*tau/2") {
    const auto m = oploss::rate_moments({1.0, 1.2, 37.5});
    CHECK(m.mean == doctest::Approx(45.0).epsilon(1e-12));
    CHECK(m.variance == doctest::Approx(22.5).epsilon(1e-12));

    const auto m2 = oploss::rate_moments({2.0, 0.75, 40.0});
    CHECK(m2.mean == doctest::Approx(60.0).epsilon(1e-12));
    CHECK(m2.variance == doctest::Approx(60.0).epsilon(1e-12));

    // tau -> 0 with a*tau = 1 approaches a constant rate gamma
    const auto lim = oploss::rate_moments({1e7, 1e-7, 33.0});
    CHECK(lim.mean == doctest::Approx(33.0).epsilon(1e-9));
}

TEST_CASE("rate autocovariance is even, exponential, and matches the variance at zero") {
    const FreqParams p{1.0, 1.2, 37.5};
    CHECK(oploss::rate_autocov(p, 0.0) == doctest::Approx(22.5).epsilon(1e-12));
    CHECK(oploss::rate_autocov(p, 1.2) == doctest::Approx(22.5 * std::exp(-1.0)).epsilon(1e-12));
    CHECK(oploss::rate_autocov(p, 1.2) == doctest::Approx(8.2772).epsilon(1e-4));
    CHECK(oploss::rate_autocov(p, 5.0 * p.tau) ==
          doctest::Approx(oploss::rate_autocov(p, -5.0 * p.tau)).epsilon(1e-14));
}

TEST_CASE("windowed count statistics") {
    const FreqParams p{1.0, 1.2, 37.5};
    const auto w = oploss::count_window_stats(p, 1.0);
    CHECK(w.mean == doctest::Approx(45.0).epsilon(1e-12));
    const double expected = 54.0 * (1.0 + 1.2 * std::expm1(-1.0 / 1.2));
    CHECK(w.variance == doctest::Approx(expected).epsilon(1e-12));
    CHECK(w.variance == doctest::Approx(17.362).epsilon(1e-4));

    // variance stays below the linear envelope and approaches it for large tw
    CHECK(w.variance < 54.0 * 1.0);
    const auto wide = oploss::count_window_stats(p, 100.0);
    CHECK(wide.variance == doctest::Approx(54.0 * 98.8).epsilon(0.02));
    CHECK(wide.variance / 100.0 == doctest::Approx(54.0).epsilon(0.02));

    // continuity at zero
    CHECK(oploss::count_window_stats(p, 1e-9).variance < 1e-12);
}

TEST_CASE("windowed count variance equals the lag-weighted autocovariance integral") {
    const FreqParams params[] = {{1.0, 1.2, 37.5}, {2.0, 0.75, 40.0}, {0.3, 3.1, 24.0}};
    for (const auto& p : params) {
        for (double tw : {0.25, 1.0, 2.0}) {
            const double closed = oploss::count_window_stats(p, tw).variance;
            const double integral =
                window_integral_of([&](double t) { return oploss::rate_autocov(p, t); }, tw);
            CHECK(integral == doctest::Approx(closed).epsilon(1e-8));
        }
    }
}

TEST_CASE("cross covariance of coupled rates") {
    PairCoupling pc = kPair;
    CHECK(pc.gamma_bar() == doctest::Approx(30.0));
    CHECK(oploss::rate_cross_cov(pc, 0.0) ==
          doctest::Approx(0.7 * 30.0 * 1.5 * 2.0 * 0.975 / 2.05).epsilon(1e-12));
    CHECK(oploss::rate_cross_cov(pc, 0.0) == doctest::Approx(29.9634).epsilon(1e-4));

    // independence and antisymmetry in c
    pc.c = 0.0;
    CHECK(oploss::rate_cross_cov(pc, 0.3) == 0.0);
    pc.c = -0.7;
    CHECK(oploss::rate_cross_cov(pc, 0.0) == doctest::Approx(-29.9634).epsilon(1e-4));

    // decay constants differ by lag sign
    pc.c = 0.7;
    const double peak = oploss::rate_cross_cov(pc, 0.0);
    CHECK(oploss::rate_cross_cov(pc, 1.3) == doctest::Approx(peak * std::exp(-1.0)).epsilon(1e-12));
    CHECK(oploss::rate_cross_cov(pc, -0.75) ==
          doctest::Approx(peak * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("swapping streams mirrors the cross-covariance lag axis") {
    const PairCoupling swapped{kPair.p2, kPair.p1, kPair.c};
    for (double t : {-2.0, -0.4, 0.0, 0.7, 3.0}) {
        CHECK(oploss::rate_cross_cov(swapped, t) ==
              doctest::Approx(oploss::rate_cross_cov(kPair, -t)).epsilon(1e-14));
    }
}

TEST_CASE("windowed count covariance: closed form, integral and reductions") {
    PairCoupling pc = kPair;
    pc.c = 0.25;
    const double v = oploss::count_window_cov(pc, 1.0);
    CHECK(v == doctest::Approx(7.80).epsilon(2e-3));
    const double integral =
        window_integral_of([&](double t) { return oploss::rate_cross_cov(pc, t); }, 1.0);
    CHECK(integral == doctest::Approx(v).epsilon(1e-8));

    pc.c = 0.0;
    CHECK(oploss::count_window_cov(pc, 1.0) == 0.0);

    // symmetric identical streams at c=1 reduce to the single-stream variance
    const FreqParams p{1.0, 1.2, 37.5};
    const PairCoupling same{p, p, 1.0};
    CHECK(oploss::count_window_cov(same, 1.0) ==
          doctest::Approx(oploss::count_window_stats(p, 1.0).variance).epsilon(1e-12));
}

TEST_CASE("linearity in c and quadratic scaling in a") {
    oploss::Substream rng(99, 0, oploss::StreamRole::aux);
    for (int i = 0; i < 50; ++i) {
        const FreqParams p1{0.2 + 5.0 * rng.next_unit(), 0.1 + 2.0 * rng.next_unit(),
                            1.0 + 40.0 * rng.next_unit()};
        const FreqParams p2{0.2 + 5.0 * rng.next_unit(), 0.1 + 2.0 * rng.next_unit(),
                            1.0 + 40.0 * rng.next_unit()};
        const double c = 2.0 * rng.next_unit() - 1.0;
        const double tw = 0.1 + 3.0 * rng.next_unit();
        const PairCoupling pc{p1, p2, c};

        const PairCoupling half{p1, p2, 0.5 * c};
        CHECK(oploss::count_window_cov(half, tw) ==
              doctest::Approx(0.5 * oploss::count_window_cov(pc, tw)).epsilon(1e-12));

        const double s = 1.0 + 3.0 * rng.next_unit();
        FreqParams scaled = p1;
        scaled.a *= s;
        CHECK(oploss::rate_moments(scaled).mean ==
              doctest::Approx(s * oploss::rate_moments(p1).mean).epsilon(1e-12));
        CHECK(oploss::rate_moments(scaled).variance ==
              doctest::Approx(s * s * oploss::rate_moments(p1).variance).epsilon(1e-12));
        CHECK(oploss::count_window_stats(scaled, tw).variance ==
              doctest::Approx(s * s * oploss::count_window_stats(p1, tw).variance)
                  .epsilon(1e-12));
        const PairCoupling both{scaled, p2, c};
        CHECK(oploss::count_window_cov(both, tw) ==
              doctest::Approx(s * oploss::count_window_cov(pc, tw)).epsilon(1e-12));
    }
}

TEST_CASE("validation rules") {
    CHECK_THROWS_AS(oploss::validate(FreqParams{0.0, 1.0, 1.0}), oploss::ValidationError);
    CHECK_THROWS_AS(oploss::validate(FreqParams{1.0, -1.0, 1.0}), oploss::ValidationError);
    CHECK_THROWS_AS(oploss::validate(FreqParams{1.0, 1.0, 0.0}), oploss::ValidationError);
    CHECK_THROWS_AS(oploss::validate(oploss::HomogRate{0.0}), oploss::ValidationError);
    CHECK_THROWS_AS(oploss::validate(PairCoupling{{1, 1, 1}, {1, 1, 1}, 1.5}),
                    oploss::ValidationError);
    CHECK_NOTHROW(oploss::validate(kPair));
}
