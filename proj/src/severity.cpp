#include "oploss/severity.hpp"

#include <cmath>

#include "oploss/errors.hpp"
#include "oploss/special.hpp"

namespace oploss {

namespace {

constexpr double kGpdExponentialCutoff = 1e-12;

void require(bool ok, const char* msg) {
    if (!ok) throw ValidationError(msg);
}

bool pos(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void validate(const SeveritySpec& spec) {
    switch (spec.family) {
        case SeverityFamily::gamma:
            require(pos(spec.p1), "gamma: alpha must be > 0");
            require(pos(spec.p2), "gamma: beta must be > 0");
            break;
        case SeverityFamily::lognormal:
            require(std::isfinite(spec.p1), "lognormal: mu must be finite");
            require(pos(spec.p2), "lognormal: sigma must be > 0");
            break;
        case SeverityFamily::gpd:
            require(std::isfinite(spec.p1) && spec.p1 >= 0.0 && spec.p1 < 0.5,
                    "gpd: k must satisfy 0 <= k < 1/2 (finite variance)");
            require(pos(spec.p2), "gpd: sigma must be > 0");
            break;
        case SeverityFamily::weibull:
            require(pos(spec.p1), "weibull: a must be > 0");
            require(pos(spec.p2), "weibull: b must be > 0");
            break;
        case SeverityFamily::burr:
            require(pos(spec.p1), "burr: alpha must be > 0");
            require(pos(spec.p2), "burr: c must be > 0");
            require(pos(spec.p3), "burr: k must be > 0");
            require(spec.p3 > 2.0 / spec.p2, "burr: k must exceed 2/c (finite variance)");
            break;
    }
}

SeverityMoments moments(const SeveritySpec& spec) {
    SeverityMoments m;
    switch (spec.family) {
        case SeverityFamily::gamma: {
            m.mean = spec.p1 * spec.p2;
            m.variance = spec.p1 * spec.p2 * spec.p2;
            break;
        }
        case SeverityFamily::lognormal: {
            const double mu = spec.p1, s2 = spec.p2 * spec.p2;
            m.mean = std::exp(mu + 0.5 * s2);
            m.variance = std::expm1(s2) * std::exp(2.0 * mu + s2);
            break;
        }
        case SeverityFamily::gpd: {
            const double k = spec.p1, sigma = spec.p2;
            m.mean = sigma / (1.0 - k);
            m.variance = sigma * sigma / ((1.0 - k) * (1.0 - k) * (1.0 - 2.0 * k));
            break;
        }
        case SeverityFamily::weibull: {
            const double a = spec.p1, b = spec.p2;
            const double g1 = std::exp(std::lgamma(1.0 + 1.0 / b));
            const double g2 = std::exp(std::lgamma(1.0 + 2.0 / b));
            m.mean = a * g1;
            m.variance = a * a * (g2 - g1 * g1);
            break;
        }
        case SeverityFamily::burr: {
            const double alpha = spec.p1, c = spec.p2, k = spec.p3;
            m.mean = k * alpha * std::exp(log_beta(k - 1.0 / c, 1.0 + 1.0 / c));
            const double second =
                k * alpha * alpha * std::exp(log_beta(k - 2.0 / c, 1.0 + 2.0 / c));
            m.variance = second - m.mean * m.mean;
            break;
        }
    }
    m.second_moment = m.variance + m.mean * m.mean;
    return m;
}

double pdf(const SeveritySpec& spec, double x) {
    if (!(x > 0.0)) throw ValidationError("pdf: x must be > 0");
    switch (spec.family) {
        case SeverityFamily::gamma: {
            const double a = spec.p1, b = spec.p2;
            return std::exp((a - 1.0) * std::log(x / b) - x / b - std::lgamma(a)) / b;
        }
        case SeverityFamily::lognormal: {
            const double z = (std::log(x) - spec.p1) / spec.p2;
            return std::exp(-0.5 * z * z) / (x * spec.p2 * std::sqrt(2.0 * std::numbers::pi));
        }
        case SeverityFamily::gpd: {
            const double k = spec.p1, sigma = spec.p2;
            if (k < kGpdExponentialCutoff) return std::exp(-x / sigma) / sigma;
            return std::pow(1.0 + k * x / sigma, -1.0 - 1.0 / k) / sigma;
        }
        case SeverityFamily::weibull: {
            const double a = spec.p1, b = spec.p2;
            const double t = std::pow(x / a, b);
            return b / a * std::pow(x / a, b - 1.0) * std::exp(-t);
        }
        case SeverityFamily::burr: {
            const double alpha = spec.p1, c = spec.p2, k = spec.p3;
            const double t = std::pow(x / alpha, c);
            return (k * c / alpha) * std::pow(x / alpha, c - 1.0) / std::pow(1.0 + t, k + 1.0);
        }
    }
    return 0.0;
}

double cdf(const SeveritySpec& spec, double x) {
    if (x <= 0.0) return 0.0;
    switch (spec.family) {
        case SeverityFamily::gamma:
            return reg_lower_gamma(spec.p1, x / spec.p2);
        case SeverityFamily::lognormal: {
            const double z = (std::log(x) - spec.p1) / spec.p2;
            return 0.5 * std::erfc(-z / std::sqrt(2.0));
        }
        case SeverityFamily::gpd: {
            const double k = spec.p1, sigma = spec.p2;
            if (k < kGpdExponentialCutoff) return -std::expm1(-x / sigma);
            return 1.0 - std::pow(1.0 + k * x / sigma, -1.0 / k);
        }
        case SeverityFamily::weibull:
            return -std::expm1(-std::pow(x / spec.p1, spec.p2));
        case SeverityFamily::burr:
            return 1.0 - std::pow(1.0 + std::pow(x / spec.p1, spec.p2), -spec.p3);
    }
    return 0.0;
}

double sample(const SeveritySpec& spec, Substream& rng) {
    switch (spec.family) {
        case SeverityFamily::gamma:
            return gamma_draw(rng, spec.p1, spec.p2);
        case SeverityFamily::lognormal:
            return std::exp(spec.p1 + spec.p2 * normal_draw(rng));
        case SeverityFamily::gpd: {
            const double k = spec.p1, sigma = spec.p2;
            const double u = rng.next_unit();
            if (k < kGpdExponentialCutoff) return -sigma * std::log1p(-u);
            return sigma * (std::pow(1.0 - u, -k) - 1.0) / k;
        }
        case SeverityFamily::weibull: {
            const double u = rng.next_unit();
            return spec.p1 * std::pow(-std::log1p(-u), 1.0 / spec.p2);
        }
        case SeverityFamily::burr: {
            const double u = rng.next_unit();
            return spec.p1 * std::pow(std::pow(1.0 - u, -1.0 / spec.p3) - 1.0, 1.0 / spec.p2);
        }
    }
    return 0.0;
}

std::vector<double> sample(const SeveritySpec& spec, Substream& rng, std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = sample(spec, rng);
    return out;
}

std::string_view family_name(SeverityFamily family) {
    switch (family) {
        case SeverityFamily::gamma: return "gamma";
        case SeverityFamily::lognormal: return "lognormal";
        case SeverityFamily::gpd: return "gpd";
        case SeverityFamily::weibull: return "weibull";
        case SeverityFamily::burr: return "burr";
    }
    return "";
}

SeverityFamily family_from_name(std::string_view name) {
    if (name == "gamma") return SeverityFamily::gamma;
    if (name == "lognormal") return SeverityFamily::lognormal;
    if (name == "gpd") return SeverityFamily::gpd;
    if (name == "weibull") return SeverityFamily::weibull;
    if (name == "burr") return SeverityFamily::burr;
    throw ValidationError("unknown severity family: " + std::string(name));
}

}  // namespace oploss
