#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oploss/errors.hpp"
#include "oploss/rng.hpp"
#include "oploss/severity.hpp"
#include "oracles.hpp"

using oploss::SeveritySpec;
using oploss::Substream;

TEST_CASE("validation accepts the documented parameter regions") {
    CHECK_NOTHROW(oploss::validate(SeveritySpec::gpd(0.15, 50.0)));
    CHECK_NOTHROW(oploss::validate(SeveritySpec::gamma(20.0, 3.0)));
    CHECK_NOTHROW(oploss::validate(SeveritySpec::weibull(5.0, 0.4)));
    CHECK_NOTHROW(oploss::validate(SeveritySpec::lognormal(0.0, 1.0)));
    CHECK_NOTHROW(oploss::validate(SeveritySpec::burr(1.0, 2.0, 1.5)));
}

TEST_CASE("validation rejects infinite-variance and out-of-domain parameters") {
    CHECK_THROWS_AS(oploss::validate(SeveritySpec::gpd(0.6, 1.0)), oploss::ValidationError);
    CHECK_THROWS_AS(oploss::validate(SeveritySpec::gpd(0.5, 1.0)), oploss::ValidationError);
    CHECK_THROWS_AS(oploss::validate(SeveritySpec::gpd(-0.1, 1.0)), oploss::ValidationError);
    CHECK_THROWS_AS(oploss::validate(SeveritySpec::burr(1.0, 1.0, 1.5)), oploss::ValidationError);
    CHECK_THROWS_AS(oploss::validate(SeveritySpec::burr(1.0, 1.0, 2.0)), oploss::ValidationError);
    CHECK_THROWS_AS(oploss::validate(SeveritySpec::gamma(0.0, 1.0)), oploss::ValidationError);
    CHECK_THROWS_AS(oploss::validate(SeveritySpec::lognormal(0.0, 0.0)),
                    oploss::ValidationError);
    CHECK_THROWS_AS(oploss::validate(SeveritySpec::weibull(1.0, -2.0)), oploss::ValidationError);

    try {
        oploss::validate(SeveritySpec::gpd(0.6, 1.0));
    } catch (const oploss::ValidationError& e) {
        CHECK(std::string(e.what()).find("k") != std::string::npos);
    }
}

TEST_CASE("closed-form moments match the frozen examples") {
    const auto gamma = oploss::moments(SeveritySpec::gamma(20.0, 3.0));
    CHECK(gamma.mean == doctest::Approx(60.0).epsilon(1e-12));
    CHECK(gamma.variance == doctest::Approx(180.0).epsilon(1e-12));
    CHECK(gamma.second_moment == doctest::Approx(3780.0).epsilon(1e-12));

    const auto logn = oploss::moments(SeveritySpec::lognormal(0.0, std::sqrt(2.0 * std::log(2.0))));
    CHECK(logn.mean == doctest::Approx(2.0).epsilon(1e-12));

    const auto expo = oploss::moments(SeveritySpec::gpd(0.0, 1.0));
    CHECK(expo.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(expo.variance == doctest::Approx(1.0).epsilon(1e-12));

    const auto weib = oploss::moments(SeveritySpec::weibull(5.0, 0.4));
    CHECK(weib.mean == doctest::Approx(5.0 * std::exp(std::lgamma(3.5))).epsilon(1e-12));
    CHECK(weib.mean == doctest::Approx(16.6167548).epsilon(1e-6));

    const auto gpd = oploss::moments(SeveritySpec::gpd(0.15, 50.0));
    CHECK(gpd.variance == doctest::Approx(2500.0 / (0.85 * 0.85 * 0.7)).epsilon(1e-12));
}

TEST_CASE("quadrature oracle confirms the closed-form moments") {
    const SeveritySpec specs[] = {
        SeveritySpec::gamma(20.0, 3.0),
        SeveritySpec::lognormal(0.0, std::sqrt(2.0 * std::log(2.0))),
        SeveritySpec::gpd(0.15, 50.0),
        SeveritySpec::weibull(5.0, 0.4),
        SeveritySpec::burr(10.0, 2.0, 2.0),
    };
    for (const auto& spec : specs) {
        CAPTURE(oploss::family_name(spec.family));
        const auto m = oploss::moments(spec);
        CHECK(oracles::quad_moment(spec, 1) == doctest::Approx(m.mean).epsilon(1e-6));
        CHECK(oracles::quad_moment(spec, 2) == doctest::Approx(m.second_moment).epsilon(1e-6));
    }
}

TEST_CASE("pdf matches hand values and domain rules") {
    CHECK(oploss::pdf(SeveritySpec::gamma(1.0, 2.0), 1e-12) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(oploss::pdf(SeveritySpec::burr(1.0, 2.0, 2.0), 1.0) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(oploss::pdf(SeveritySpec::gamma(2.0, 2.0), 0.0), oploss::ValidationError);
    CHECK_THROWS_AS(oploss::pdf(SeveritySpec::gamma(2.0, 2.0), -1.0), oploss::ValidationError);
}

TEST_CASE("pdf integrates to one") {
    const SeveritySpec specs[] = {
        SeveritySpec::gpd(0.15, 50.0),
        SeveritySpec::gamma(20.0, 3.0),
        SeveritySpec::weibull(5.0, 1.1),
        SeveritySpec::burr(10.0, 2.0, 2.0),
    };
    for (const auto& spec : specs) {
        CAPTURE(oploss::family_name(spec.family));
        CHECK(oracles::quad_moment(spec, 0) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("random valid specs: quadrature matches closed forms at 1e-4") {
    // 100 random draws per family from regions where the quadrature tail is
    // resolvable in double precision.
    Substream rng(2024, 0, oploss::StreamRole::aux);
    auto unif = [&](double lo, double hi) { return lo + (hi - lo) * rng.next_unit(); };
    for (int i = 0; i < 100; ++i) {
        const SeveritySpec specs[] = {
            SeveritySpec::gamma(unif(0.5, 25.0), unif(0.2, 10.0)),
            SeveritySpec::lognormal(unif(-1.0, 2.0), unif(0.2, 1.8)),
            SeveritySpec::gpd(unif(0.0, 0.3), unif(1.0, 100.0)),
            SeveritySpec::weibull(unif(0.5, 20.0), unif(0.45, 3.0)),
            SeveritySpec::burr(unif(0.5, 20.0), unif(1.6, 3.0), 0.0),
        };
        for (auto spec : specs) {
            if (spec.family == oploss::SeverityFamily::burr) {
                spec.p3 = unif(3.4, 8.0) / spec.p2;  // keep c*k well above 2
            }
            CAPTURE(oploss::family_name(spec.family));
            CAPTURE(spec.p1);
            CAPTURE(spec.p2);
            CAPTURE(spec.p3);
            oploss::validate(spec);
            const auto m = oploss::moments(spec);
            CHECK(oracles::quad_moment(spec, 1) == doctest::Approx(m.mean).epsilon(1e-4));
            CHECK(oracles::quad_moment(spec, 2) ==
                  doctest::Approx(m.second_moment).epsilon(1e-4));
            CHECK(m.second_moment - m.mean * m.mean == doctest::Approx(m.variance).epsilon(1e-12));
        }
    }
}

TEST_CASE("sampling is deterministic per substream") {
    const auto spec = SeveritySpec::gpd(0.15, 50.0);
    Substream a(7, 3, oploss::StreamRole::severity_1);
    Substream b(7, 3, oploss::StreamRole::severity_1);
    const auto xs = oploss::sample(spec, a, 1000);
    const auto ys = oploss::sample(spec, b, 1000);
    CHECK(xs == ys);
    Substream c(8, 3, oploss::StreamRole::severity_1);
    CHECK(oploss::sample(spec, c, 1000) != xs);
}

TEST_CASE("sample mean and variance converge to the closed forms") {
    const std::size_t n = 1'000'000;
    {
        const auto spec = SeveritySpec::gamma(20.0, 3.0);
        Substream rng(11, 0, oploss::StreamRole::severity_1);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += oploss::sample(spec, rng);
        const double mean = s / double(n);
        const double se = std::sqrt(180.0 / double(n));
        CHECK(std::fabs(mean - 60.0) < 4.0 * se);
    }
    {
        const auto spec = SeveritySpec::gpd(0.15, 50.0);
        Substream rng(12, 0, oploss::StreamRole::severity_1);
        double s = 0.0, q = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = oploss::sample(spec, rng);
            s += x;
            q += x * x;
        }
        const double mean = s / double(n);
        const double var = q / double(n) - mean * mean;
        const auto m = oploss::moments(spec);
        // SE of the sample variance from the quadrature fourth moment
        const double mu4 = oracles::quad_moment(spec, 4);
        const double se = std::sqrt((mu4 - m.variance * m.variance) / double(n));
        CHECK(std::fabs(var - m.variance) < 5.0 * se);
        CHECK(m.variance == doctest::Approx(4943.2).epsilon(1e-4));
    }
}

TEST_CASE("empirical CDF passes a 1% Kolmogorov-Smirnov check at n=1e5") {
    const std::size_t n = 100'000;
    const double crit = 1.628 / std::sqrt(double(n));
    const SeveritySpec specs[] = {
        SeveritySpec::gamma(20.0, 3.0),     SeveritySpec::lognormal(0.2, 1.1),
        SeveritySpec::gpd(0.15, 50.0),      SeveritySpec::weibull(5.0, 0.4),
        SeveritySpec::burr(10.0, 2.0, 2.0),
    };
    std::uint32_t stream_id = 0;
    for (const auto& spec : specs) {
        CAPTURE(oploss::family_name(spec.family));
        Substream rng(31, stream_id++, oploss::StreamRole::severity_1);
        auto xs = oploss::sample(spec, rng, n);
        std::sort(xs.begin(), xs.end());
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = oploss::cdf(spec, xs[i]);
            d = std::max(d, std::fabs(double(i + 1) / double(n) - f));
            d = std::max(d, std::fabs(double(i) / double(n) - f));
        }
        CHECK(d < crit);
    }
}
