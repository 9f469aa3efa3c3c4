#pragma once

#include <algorithm>

namespace oploss {

/// Shot-noise rate: nu jumps by `a` at Poisson(gamma) times and decays back
/// toward zero with time constant tau. Stationary mean a*tau*gamma.
struct FreqParams {
    double a = 1.0;      // jump size (events/year)
    double tau = 1.0;    // decay time (years)
    double gamma = 1.0;  // driving Poisson rate (1/years)
};

/// Constant-rate Poisson frequency.
struct HomogRate {
    double nu_r = 1.0;  // events/year
};

/// Two shot-noise streams sharing jump times at probability rate |c|*gamma_bar.
/// c > 0: common jumps move both rates up. c < 0: they move in opposite
/// directions (the downward side is floored at zero by the simulator).
struct PairCoupling {
    FreqParams p1;
    FreqParams p2;
    double c = 0.0;  // input correlation in [-1, 1]

    double gamma_bar() const { return std::min(p1.gamma, p2.gamma); }
};

struct RateMoments {
    double mean = 0.0;      // a*tau*gamma
    double variance = 0.0;  // a^2*gamma*tau/2
};

struct CountWindowStats {
    double mean = 0.0;
    double variance = 0.0;
};

void validate(const FreqParams& p);
void validate(const HomogRate& r);
void validate(const PairCoupling& pc);

/// integral_0^tw (tw - t) exp(-t/tau) dt = tau*(tw + tau*(exp(-tw/tau) - 1)).
/// The window kernel shared by every windowed variance/covariance formula.
double decay_window_integral(double tau, double tw);

RateMoments rate_moments(const FreqParams& p);

/// A_nu(t) = (a^2*gamma*tau/2) * exp(-|t|/tau)
double rate_autocov(const FreqParams& p, double lag);

/// Mean tw*a*gamma*tau and variance a^2*gamma*tau^2*(tw + tau*(exp(-tw/tau)-1))
/// of the events measure in a window of length tw.
CountWindowStats count_window_stats(const FreqParams& p, double tw);

/// CC_nu(t): decays with tau1 for t >= 0 and tau2 for t < 0; linear in c.
double rate_cross_cov(const PairCoupling& pc, double lag);

/// Windowed count covariance; equals the (tw - |t|)-weighted integral of
/// rate_cross_cov.
double count_window_cov(const PairCoupling& pc, double tw);

}  // namespace oploss
