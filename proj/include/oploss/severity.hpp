#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "oploss/rng.hpp"

namespace oploss {

enum class SeverityFamily { gamma, lognormal, gpd, weibull, burr };

/// One parametric severity family with its parameters (currency per event).
/// Parameter slots by family:
///   gamma:     p1 = alpha (shape), p2 = beta (scale)
///   lognormal: p1 = mu,            p2 = sigma
///   gpd:       p1 = k (shape),     p2 = sigma (scale)
///   weibull:   p1 = a (scale),     p2 = b (shape)
///   burr:      p1 = alpha (scale), p2 = c, p3 = k
struct SeveritySpec {
    SeverityFamily family = SeverityFamily::gamma;
    double p1 = 1.0;
    double p2 = 1.0;
    double p3 = 0.0;

    static SeveritySpec gamma(double alpha, double beta) {
        return {SeverityFamily::gamma, alpha, beta, 0.0};
    }
    static SeveritySpec lognormal(double mu, double sigma) {
        return {SeverityFamily::lognormal, mu, sigma, 0.0};
    }
    static SeveritySpec gpd(double k, double sigma) {
        return {SeverityFamily::gpd, k, sigma, 0.0};
    }
    static SeveritySpec weibull(double a, double b) {
        return {SeverityFamily::weibull, a, b, 0.0};
    }
    static SeveritySpec burr(double alpha, double c, double k) {
        return {SeverityFamily::burr, alpha, c, k};
    }
};

struct SeverityMoments {
    double mean = 0.0;
    double variance = 0.0;
    double second_moment = 0.0;
};

/// Throws ValidationError naming the violated constraint. Acceptance region
/// includes the finite-variance conditions: GPD needs 0 <= k < 1/2, Burr
/// needs k > 2/c.
void validate(const SeveritySpec& spec);

SeverityMoments moments(const SeveritySpec& spec);

/// Density at x > 0; x <= 0 is a domain error.
double pdf(const SeveritySpec& spec, double x);

/// Distribution function; 0 for x <= 0.
double cdf(const SeveritySpec& spec, double x);

/// One draw. GPD, Weibull and Burr use their closed-form quantiles; gamma and
/// lognormal use standard transforms. Deterministic per substream.
double sample(const SeveritySpec& spec, Substream& rng);

std::vector<double> sample(const SeveritySpec& spec, Substream& rng, std::size_t n);

std::string_view family_name(SeverityFamily family);
SeverityFamily family_from_name(std::string_view name);

}  // namespace oploss
