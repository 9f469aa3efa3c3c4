#include "oploss/freq.hpp"

#include <cmath>

#include "oploss/errors.hpp"

namespace oploss {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw ValidationError(msg);
}

}  // namespace

void validate(const FreqParams& p) {
    require(std::isfinite(p.a) && p.a > 0.0, "freq: a must be > 0");
    require(std::isfinite(p.tau) && p.tau > 0.0, "freq: tau must be > 0");
    require(std::isfinite(p.gamma) && p.gamma > 0.0, "freq: gamma must be > 0");
}

void validate(const HomogRate& r) {
    require(std::isfinite(r.nu_r) && r.nu_r > 0.0, "freq: nu_r must be > 0");
}

void validate(const PairCoupling& pc) {
    validate(pc.p1);
    validate(pc.p2);
    require(std::isfinite(pc.c) && pc.c >= -1.0 && pc.c <= 1.0, "pair: c must lie in [-1, 1]");
    require(std::fabs(pc.c) * pc.gamma_bar() <= std::min(pc.p1.gamma, pc.p2.gamma) + 1e-12,
            "pair: |c|*gamma_bar exceeds min(gamma1, gamma2)");
}

double decay_window_integral(double tau, double tw) {
    return tau * (tw + tau * std::expm1(-tw / tau));
}

RateMoments rate_moments(const FreqParams& p) {
    return {p.a * p.tau * p.gamma, 0.5 * p.a * p.a * p.gamma * p.tau};
}

double rate_autocov(const FreqParams& p, double lag) {
    return rate_moments(p).variance * std::exp(-std::fabs(lag) / p.tau);
}

CountWindowStats count_window_stats(const FreqParams& p, double tw) {
    const double mean = tw * p.a * p.gamma * p.tau;
    // 2 * A_nu(0) * decay_window_integral = a^2*gamma*tau^2*(tw + tau*expm1(-tw/tau))
    const double variance = p.a * p.a * p.gamma * p.tau * decay_window_integral(p.tau, tw);
    return {mean, variance};
}

double rate_cross_cov(const PairCoupling& pc, double lag) {
    const double tau1 = pc.p1.tau, tau2 = pc.p2.tau;
    const double prefactor = pc.c * pc.gamma_bar() * pc.p1.a * pc.p2.a * tau1 * tau2 / (tau1 + tau2);
    return prefactor * (lag >= 0.0 ? std::exp(-lag / tau1) : std::exp(lag / tau2));
}

double count_window_cov(const PairCoupling& pc, double tw) {
    const double tau1 = pc.p1.tau, tau2 = pc.p2.tau;
    const double prefactor = pc.c * pc.gamma_bar() * pc.p1.a * pc.p2.a * tau1 * tau2 / (tau1 + tau2);
    return prefactor * (decay_window_integral(tau1, tw) + decay_window_integral(tau2, tw));
}

}  // namespace oploss
